// Browser entry point. The API defaults to same-origin, which matches
// the service mounting these files at /; pass ?api=http://host:port to
// point the client somewhere else during development.
import { ApiClient } from './api.js';
import { KitchenApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? '';
const root = document.getElementById('app');
if (root === null) throw new Error('missing #app root element');
void new KitchenApp(root, new ApiClient(base)).boot();
