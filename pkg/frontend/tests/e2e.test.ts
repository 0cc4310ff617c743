// Full-stack run against a real service process: the app plays the
// whole five-game flow with keyboard input only, and the log the
// server kept is then replayed and re-measured with the Python tools.
import { afterAll, beforeAll, expect, test } from 'vitest';
import { mkdtemp, writeFile } from 'node:fs/promises';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { ApiClient } from '../src/api.js';
import { KitchenApp } from '../src/app.js';
import { ServedApi, runCli, runPython, splitLogChunks, startServer } from './server.js';

const distDir = join(dirname(fileURLToPath(import.meta.url)), '..', 'dist');

let server: ServedApi;

beforeAll(async () => {
  server = await startServer({ ui: distDir });
});

afterAll(async () => {
  await server?.stop();
});

function press(key: string): void {
  document.dispatchEvent(new KeyboardEvent('keydown', { key, bubbles: true, cancelable: true }));
}

const REPLAY_SCRIPT = `
import sys
from souschef.kitchen import load_bundled
from souschef.logs import SessionLog, replay

for path in sys.argv[1:]:
    log = SessionLog.read(path)
    problem, state = replay(log, load_bundled(log.meta["game_id"]))
    in_events = {
        e.data["meal"]
        for entry in log.entries
        for e in entry.events
        if e.kind == "meal_delivered"
    }
    in_state = {str(f).split()[1] for f in state.fluents if str(f).startswith("delivered ")}
    assert in_events == in_state, (path, in_events, in_state)
print("REPLAY_OK", len(sys.argv) - 1)
`;

test('serves the client bundle and the API from one process', async () => {
  const page = await fetch(`${server.baseUrl}/`);
  expect(page.status).toBe(200);
  expect(await page.text()).toContain('<div id="app">');
  expect((await fetch(`${server.baseUrl}/main.js`)).status).toBe(200);
  expect((await fetch(`${server.baseUrl}/vendor/zod/index.js`)).status).toBe(200);
  expect((await fetch(`${server.baseUrl}/styles.css`)).status).toBe(200);
  const games = (await (await fetch(`${server.baseUrl}/games`)).json()) as unknown[];
  expect(games).toHaveLength(5);
});

test('keyboard-only five-game flow, then replay and metrics on the log', async () => {
  const api = new ApiClient(server.baseUrl);
  document.body.innerHTML = '<div id="app"></div>';
  const app = new KitchenApp(document.getElementById('app') as HTMLElement, api, {
    storage: null,
  });
  try {
    await app.boot();
    (document.getElementById('session-kind') as HTMLSelectElement).value = 'game';
    (document.getElementById('session-condition') as HTMLSelectElement).value =
      'suboptimal-subgoal';
    (document.getElementById('session-seed') as HTMLInputElement).value = '11';
    (document.querySelector('form.landing-form') as HTMLFormElement).dispatchEvent(
      new Event('submit', { bubbles: true, cancelable: true }),
    );
    await app.settled();

    const created = app.currentView;
    expect(created?.kind).toBe('game');
    const sessionId = created!.session_id;

    let sawAdvisedCard = false;
    const stagesPlayed = new Set<string>();
    for (let step = 0; step < 700 && app.currentView?.status === 'active'; step++) {
      const game = app.currentView.game;
      expect(game).not.toBeNull();
      stagesPlayed.add(game!.stage);
      if (game!.stage === 'assessment') {
        // The unadvised stage: no card in the document, ever.
        expect(game!.mode).toBe('none');
        expect(game!.recommendation).toBeNull();
        expect(document.querySelector('.recommendation-card')).toBeNull();
        press('Enter');
      } else if (game!.recommendation !== null) {
        expect(document.querySelector('.recommendation-card')).not.toBeNull();
        sawAdvisedCard = true;
        press('r');
        press('Enter');
      } else {
        press('Enter');
      }
      await app.settled();
      if (document.querySelector('.error-banner') !== null) {
        throw new Error(
          `unexpected error banner: ${document.querySelector('.error-banner')?.textContent}`,
        );
      }
    }

    expect(app.currentView?.status).toBe('complete');
    expect(stagesPlayed).toEqual(new Set(['familiarization', 'advised', 'assessment']));
    expect(sawAdvisedCard).toBe(true);
    expect(document.querySelector('.complete-screen')).not.toBeNull();
    expect(document.querySelector('.log-link')?.getAttribute('href')).toBe(
      `${server.baseUrl}/sessions/${sessionId}/log`,
    );

    // The server-side log replays cleanly, stage by stage.
    const logText = await api.exportLog(sessionId);
    const chunks = splitLogChunks(logText);
    expect(chunks).toHaveLength(5);
    const scratch = await mkdtemp(join(tmpdir(), 'souschef-log-'));
    const files: string[] = [];
    for (const [index, chunk] of chunks.entries()) {
      const file = join(scratch, `stage${index}.jsonl`);
      await writeFile(file, chunk, 'utf-8');
      files.push(file);
    }
    expect(await runPython(REPLAY_SCRIPT, files)).toContain('REPLAY_OK 5');

    // And the metrics tooling recomputes a row per stage.
    const csvPath = join(scratch, 'summary.csv');
    const metricsOut = await runCli(['metrics', ...files, '--csv', csvPath]);
    const rows = metricsOut
      .trim()
      .split('\n')
      .map((line) => JSON.parse(line) as Record<string, unknown>);
    expect(rows).toHaveLength(5);
    for (const row of rows) {
      expect(typeof row['upc']).toBe('number');
      expect(row['condition']).toBe('suboptimal-subgoal');
    }
    const advisedRows = rows.filter((row) => row['game_id'] !== 'dinner_rush');
    expect(advisedRows.every((row) => (row['optimal_shown'] as number) > 0)).toBe(true);
    const assessmentRow = rows.find((row) => row['game_id'] === 'dinner_rush');
    expect(assessmentRow?.['optimal_shown']).toBe(0);
    expect(assessmentRow?.['oac_pct']).toBe('');
  } finally {
    app.destroy();
  }
});
