// The preference review against a real service: 25 clips voted with
// the keyboard, a duplicate vote surfaced, a remount resuming at the
// first unvoted clip, and the exported votes re-tallied in Python.
import { afterAll, beforeAll, expect, test } from 'vitest';
import { mkdtemp, writeFile } from 'node:fs/promises';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { ApiClient, ApiError } from '../src/api.js';
import { KitchenApp, StorageLike } from '../src/app.js';
import { ServedApi, runPython, startServer } from './server.js';

let server: ServedApi;

beforeAll(async () => {
  server = await startServer();
});

afterAll(async () => {
  await server?.stop();
});

function press(key: string): void {
  document.dispatchEvent(new KeyboardEvent('keydown', { key, bubbles: true, cancelable: true }));
}

function memoryStorage(): StorageLike {
  const store = new Map<string, string>();
  return {
    getItem: (key) => store.get(key) ?? null,
    setItem: (key, value) => void store.set(key, value),
    removeItem: (key) => void store.delete(key),
  };
}

const TALLY_SCRIPT = `
import sys
from souschef.logs import SessionLog
from souschef.metrics import pref_tally

log = SessionLog.read(sys.argv[1])
assert len(log.votes) == 25, len(log.votes)
assert len({v.clip_id for v in log.votes}) == 25, "votes must cover 25 distinct clips"
tally = pref_tally([log])
assert tally is not None
assert abs(sum(tally.values()) - 100.0) < 1e-9, tally
print("TALLY_OK", sorted(tally))
`;

test('25-clip review with resume, duplicate rejection, and a 100% tally', async () => {
  const api = new ApiClient(server.baseUrl);
  const storage = memoryStorage();
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById('app') as HTMLElement;

  const app = new KitchenApp(root, api, { storage });
  try {
    await app.boot();
    (document.getElementById('session-kind') as HTMLSelectElement).value = 'preference';
    (document.getElementById('session-seed') as HTMLInputElement).value = '7';
    (document.querySelector('form.landing-form') as HTMLFormElement).dispatchEvent(
      new Event('submit', { bubbles: true, cancelable: true }),
    );
    await app.settled();

    const view = app.currentView;
    expect(view?.kind).toBe('preference');
    expect(view?.preference?.total).toBe(25);
    expect(document.querySelector('.clip-card')).not.toBeNull();
    const sessionId = view!.session_id;

    // Vote the first ten clips, cycling through the option hotkeys.
    for (let i = 0; i < 10; i++) {
      press(String((i % 3) + 1));
      press('Enter');
      await app.settled();
      expect(app.currentView?.preference?.cursor).toBe(i + 1);
    }

    // A stale or repeated vote is rejected by the service.
    const clip0 = 'clip-00';
    const duplicate = await api
      .submitVote(sessionId, 0, clip0, 'subgoal')
      .then(() => null)
      .catch((error: unknown) => error);
    expect(duplicate).toBeInstanceOf(ApiError);
    expect((duplicate as ApiError).status).toBe(409);
  } finally {
    app.destroy();
  }

  // Remount with the same storage: the session resumes at clip 11.
  const revived = new KitchenApp(root, api, { storage });
  try {
    await revived.boot();
    expect(revived.currentView?.preference?.cursor).toBe(10);
    expect(document.querySelector('.clip-card')).not.toBeNull();
    expect(document.querySelector('.progress')?.textContent).toBe('Clip 11 of 25');

    for (let i = 10; revived.currentView?.status === 'active' && i < 40; i++) {
      press(String((i % 3) + 1));
      press('Enter');
      await revived.settled();
    }

    expect(revived.currentView?.status).toBe('complete');
    expect(document.querySelector('.complete-screen')).not.toBeNull();
    const counts = [...document.querySelectorAll('.tally-count')].map((cell) =>
      Number(cell.textContent),
    );
    expect(counts.reduce((a, b) => a + b, 0)).toBe(25);
    const percents = [...document.querySelectorAll('.tally-percent')].map((cell) =>
      parseFloat(cell.textContent ?? '0'),
    );
    expect(percents.reduce((a, b) => a + b, 0)).toBeCloseTo(100, 6);

    // The exported votes log re-tallies to 100% in Python.
    const logText = await api.exportLog(revived.currentView!.session_id);
    const scratch = await mkdtemp(join(tmpdir(), 'souschef-votes-'));
    const votesFile = join(scratch, 'votes.jsonl');
    await writeFile(votesFile, logText, 'utf-8');
    expect(await runPython(TALLY_SCRIPT, [votesFile])).toContain('TALLY_OK');
  } finally {
    revived.destroy();
  }
});
