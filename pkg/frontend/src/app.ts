// The interactive shell: one landing form, one game screen, one
// preference-review screen, all rendered from the latest session view.
//
// Interaction model: a single stream. At most one submit is in flight
// at a time; keypresses and clicks while a submit is pending are
// dropped, and views pushed over the event stream are merged with
// submit responses by recency, so the screen always shows the newest
// state the server has confirmed.
import { ApiClient, ApiError, FetchLike } from './api.js';
import { openEventStream } from './sse.js';
import { SessionView, isNewerView, sessionViewSchema } from './types.js';
import {
  GameViewModel,
  gameViewModel,
  preferenceViewModel,
  sessionBanner,
} from './viewmodel.js';

const SESSION_STORAGE_KEY = 'souschef-session-id';

export type StorageLike = Pick<Storage, 'getItem' | 'setItem' | 'removeItem'>;

export interface AppOptions {
  fetchImpl?: FetchLike;
  storage?: StorageLike | null;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) {
    node.append(typeof child === 'string' ? doc.createTextNode(child) : child);
  }
  return node;
}

function errorMessage(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return `Connection problem: ${error.message}`;
  return String(error);
}

export class KitchenApp {
  private view: SessionView | null = null;
  private conditions: string[] = [];
  private pending = false;
  private thinking = false;
  private error: string | null = null;
  private selection = 0;
  private stopEvents: (() => void) | null = null;
  private readonly updateListeners: (() => void)[] = [];
  private readonly doc: Document;
  private readonly storage: StorageLike | null;
  private readonly onKeyDown = (event: KeyboardEvent) => this.handleKey(event);

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: AppOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.storage =
      options.storage !== undefined
        ? options.storage
        : typeof localStorage === 'undefined'
          ? null
          : localStorage;
  }

  // -- lifecycle -------------------------------------------------------

  async boot(): Promise<void> {
    this.doc.addEventListener('keydown', this.onKeyDown);
    try {
      this.conditions = await this.api.listConditions();
    } catch (error) {
      this.error = errorMessage(error);
    }
    const saved = this.storage?.getItem(SESSION_STORAGE_KEY) ?? null;
    if (saved !== null) {
      try {
        this.adoptSession(await this.api.getView(saved));
        return;
      } catch {
        this.storage?.removeItem(SESSION_STORAGE_KEY);
      }
    }
    this.render();
  }

  destroy(): void {
    this.doc.removeEventListener('keydown', this.onKeyDown);
    this.stopEvents?.();
    this.stopEvents = null;
  }

  get currentView(): SessionView | null {
    return this.view;
  }

  get isPending(): boolean {
    return this.pending;
  }

  onUpdate(listener: () => void): () => void {
    this.updateListeners.push(listener);
    return () => {
      const index = this.updateListeners.indexOf(listener);
      if (index >= 0) this.updateListeners.splice(index, 1);
    };
  }

  // Resolves once no submit is in flight, after the next render if one
  // is. Lets scripted drivers await the outcome of a keypress.
  settled(): Promise<SessionView | null> {
    if (!this.pending) return Promise.resolve(this.view);
    return new Promise((resolve) => {
      const off = this.onUpdate(() => {
        if (!this.pending) {
          off();
          resolve(this.view);
        }
      });
    });
  }

  // -- session plumbing ------------------------------------------------

  async startSession(kind: 'game' | 'preference', condition: string, seed: number | null): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.error = null;
    this.render();
    try {
      const body =
        kind === 'game'
          ? { kind, condition, ...(seed === null ? {} : { seed }) }
          : { kind, ...(seed === null ? {} : { seed }) };
      this.adoptSession(await this.api.createSession(body));
    } catch (error) {
      this.error = errorMessage(error);
    } finally {
      this.pending = false;
      this.render();
    }
  }

  private adoptSession(view: SessionView): void {
    this.storage?.setItem(SESSION_STORAGE_KEY, view.session_id);
    this.view = null;
    this.applyView(view);
    this.openEvents(view.session_id);
    this.render();
  }

  private openEvents(sessionId: string): void {
    this.stopEvents?.();
    this.stopEvents = openEventStream(
      this.api.eventsUrl(sessionId),
      (payload) => {
        try {
          this.applyView(sessionViewSchema.parse(JSON.parse(payload)));
        } catch {
          // Malformed frame; the next submit or push supersedes it.
        }
      },
      { fetchImpl: this.options.fetchImpl },
    );
  }

  private applyView(view: SessionView): void {
    if (!isNewerView(view, this.view)) return;
    this.view = view;
    this.selection = this.defaultSelection();
    if (view.status === 'complete') {
      this.storage?.removeItem(SESSION_STORAGE_KEY);
    }
    this.render();
  }

  private defaultSelection(): number {
    const game = this.view?.game;
    if (game && game.recommendation !== null) {
      const index = game.legal_actions.indexOf(game.recommendation.action);
      if (index >= 0) return index;
    }
    return 0;
  }

  private controlCount(): number {
    const view = this.view;
    if (view === null || view.status !== 'active') return 0;
    if (view.kind === 'game') return view.game?.legal_actions.length ?? 0;
    return view.preference?.clip?.options.length ?? 0;
  }

  private async perform(call: () => Promise<SessionView>): Promise<void> {
    this.pending = true;
    this.error = null;
    this.render();
    try {
      this.applyView(await call());
    } catch (error) {
      this.error = errorMessage(error);
      // Re-fetch so a rejected submit leaves the screen on real state.
      if (this.view !== null) {
        try {
          this.applyView(await this.api.getView(this.view.session_id));
        } catch {
          // Keep the previous view; the error banner already explains.
        }
      }
    } finally {
      this.pending = false;
      this.thinking = false;
      this.render();
    }
  }

  private submitSelected(): void {
    const view = this.view;
    if (view === null || this.pending || view.status !== 'active') return;
    if (view.kind === 'game') {
      const game = view.game;
      if (!game) return;
      const action = game.legal_actions[this.selection];
      if (action === undefined) return;
      this.thinking = game.recommendation !== null && action !== game.recommendation.action;
      void this.perform(() => this.api.submitAction(view.session_id, game.seq, action));
    } else {
      const pref = view.preference;
      const option = pref?.clip?.options[this.selection];
      if (!pref || !pref.clip || option === undefined) return;
      const clipId = pref.clip.clip_id;
      void this.perform(() =>
        this.api.submitVote(view.session_id, pref.seq, clipId, option.mode),
      );
    }
  }

  private leaveSession(): void {
    this.storage?.removeItem(SESSION_STORAGE_KEY);
    this.stopEvents?.();
    this.stopEvents = null;
    this.view = null;
    this.error = null;
    this.selection = 0;
    this.render();
  }

  // -- input -----------------------------------------------------------

  private handleKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    const tag = target?.tagName ?? '';
    if (tag === 'INPUT' || tag === 'SELECT' || tag === 'TEXTAREA') return;
    const count = this.controlCount();
    if (count === 0) return;
    if (event.key === 'ArrowDown') {
      this.selection = (this.selection + 1) % count;
      event.preventDefault();
      this.render();
    } else if (event.key === 'ArrowUp') {
      this.selection = (this.selection + count - 1) % count;
      event.preventDefault();
      this.render();
    } else if (event.key === 'Enter') {
      event.preventDefault();
      this.submitSelected();
    } else if (event.key === 'r' || event.key === 'R') {
      const game = this.view?.game;
      if (game && game.recommendation !== null) {
        const index = game.legal_actions.indexOf(game.recommendation.action);
        if (index >= 0) {
          this.selection = index;
          event.preventDefault();
          this.render();
        }
      }
    } else if (this.view?.kind === 'preference' && /^[1-9]$/.test(event.key)) {
      const index = Number(event.key) - 1;
      if (index < count) {
        this.selection = index;
        event.preventDefault();
        this.render();
      }
    }
  }

  // -- rendering -------------------------------------------------------

  private render(): void {
    const doc = this.doc;
    const children: Node[] = [];
    if (this.error !== null) {
      children.push(el(doc, 'div', { class: 'error-banner', role: 'alert' }, [this.error]));
    }
    if (this.view === null) {
      children.push(this.renderLanding());
    } else if (this.view.kind === 'preference') {
      children.push(this.renderPreference(this.view));
    } else if (this.view.status === 'complete' || !this.view.game) {
      children.push(this.renderGameComplete(this.view));
    } else {
      children.push(this.renderGame(this.view, gameViewModel(this.view.game)));
    }
    this.root.replaceChildren(...children);
    for (const listener of [...this.updateListeners]) listener();
  }

  private renderLanding(): HTMLElement {
    const doc = this.doc;
    const kindSelect = el(doc, 'select', { id: 'session-kind', name: 'kind' }, [
      el(doc, 'option', { value: 'game' }, ['Kitchen games']),
      el(doc, 'option', { value: 'preference' }, ['Explanation review']),
    ]);
    const conditionSelect = el(
      doc,
      'select',
      { id: 'session-condition', name: 'condition' },
      this.conditions.map((c) => el(doc, 'option', { value: c }, [c])),
    );
    const seedInput = el(doc, 'input', {
      id: 'session-seed',
      name: 'seed',
      type: 'number',
      placeholder: 'blank for automatic',
    });
    const form = el(doc, 'form', { class: 'landing-form' }, [
      el(doc, 'label', { for: 'session-kind' }, ['Session']),
      kindSelect,
      el(doc, 'label', { for: 'session-condition' }, ['Condition']),
      conditionSelect,
      el(doc, 'label', { for: 'session-seed' }, ['Seed']),
      seedInput,
      el(doc, 'button', { type: 'submit', id: 'start-session' }, ['Start']),
    ]);
    kindSelect.addEventListener('change', () => {
      conditionSelect.disabled = kindSelect.value === 'preference';
    });
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const seed = seedInput.value.trim() === '' ? null : Number(seedInput.value);
      void this.startSession(
        kindSelect.value === 'preference' ? 'preference' : 'game',
        conditionSelect.value,
        seed !== null && Number.isFinite(seed) ? Math.trunc(seed) : null,
      );
    });
    return el(doc, 'div', { class: 'landing' }, [
      el(doc, 'h1', {}, ['Sous-chef kitchen']),
      el(doc, 'p', {}, [
        'Run a five-game kitchen shift with Manager Molly at your side, ' +
          'or review her explanations clip by clip.',
      ]),
      form,
      this.pending ? el(doc, 'p', { class: 'pending' }, ['Starting…']) : el(doc, 'span', {}),
    ]);
  }

  private renderBanner(view: SessionView): HTMLElement {
    const doc = this.doc;
    const entries = sessionBanner(view);
    return el(
      doc,
      'ol',
      { class: 'stage-banner' },
      entries.map((entry) =>
        el(
          doc,
          'li',
          {
            class: `stage-chip stage-${entry.status}${entry.current ? ' stage-current' : ''}`,
          },
          [`${entry.title} (${entry.stage})`],
        ),
      ),
    );
  }

  private renderGame(view: SessionView, vm: GameViewModel): HTMLElement {
    const doc = this.doc;
    const meter = el(doc, 'div', { class: 'meter' }, [
      el(doc, 'div', {
        class: 'meter-fill',
        style: `width: ${(vm.meterFraction * 100).toFixed(1)}%`,
      }),
    ]);
    const header = el(doc, 'header', { class: 'game-header' }, [
      el(doc, 'h1', {}, [vm.title]),
      el(doc, 'span', { class: `stage-tag stage-${vm.stage}` }, [vm.stage]),
      el(doc, 'div', { class: 'clock' }, [`Time spent: ${vm.clock} of ${vm.timeLimit}`]),
      meter,
    ]);

    const mealStrip = el(
      doc,
      'ul',
      { class: 'meal-strip' },
      vm.meals.map((meal) => {
        const state = meal.delivered
          ? `delivered at ${meal.deliveredAt}`
          : `due by ${meal.deadline}`;
        return el(
          doc,
          'li',
          { class: `meal-chip${meal.late ? ' meal-late' : ''}${meal.delivered ? ' meal-done' : ''}` },
          [`${meal.label}: ${state}${meal.late ? ' (late)' : ''}`],
        );
      }),
    );

    const stations = el(
      doc,
      'div',
      { class: 'stations' },
      vm.stations.map((panel) =>
        el(doc, 'section', { class: 'station-panel', 'data-station': panel.station }, [
          el(doc, 'h3', {}, [panel.label]),
          panel.chefHere ? el(doc, 'p', { class: 'chef-marker' }, ['chef is here']) : el(doc, 'span', {}),
          el(
            doc,
            'ul',
            { class: 'station-items' },
            panel.items.map((item) =>
              el(doc, 'li', {}, [`${item.label} (${item.notes.join(', ')})`]),
            ),
          ),
        ]),
      ),
    );

    const recipes = el(doc, 'aside', { class: 'recipe-sidebar' }, [
      el(doc, 'h3', {}, ['Recipes']),
      ...vm.recipes.map((recipe) =>
        el(doc, 'section', { class: 'recipe' }, [
          el(doc, 'h4', {}, [`${recipe.label} (due by ${recipe.deadline})`]),
          el(
            doc,
            'ul',
            {},
            recipe.parts.map((part) => el(doc, 'li', {}, [`${part.label}: ${part.note}`])),
          ),
        ]),
      ),
    ]);

    const pieces: Node[] = [this.renderBanner(view), header, mealStrip];

    if (vm.recommendation !== null) {
      pieces.push(
        el(doc, 'section', { class: 'recommendation-card' }, [
          el(doc, 'h3', {}, ['Manager Molly suggests']),
          el(doc, 'p', { class: 'recommendation-action' }, [vm.recommendation.actionLabel]),
          el(doc, 'p', { class: 'recommendation-text' }, [vm.recommendation.text]),
          el(doc, 'p', { class: 'hint' }, ['Press r to highlight it, Enter to do it.']),
        ]),
      );
    }
    if (this.thinking && this.pending) {
      pieces.push(el(doc, 'div', { class: 'thinking' }, ['Molly is thinking…']));
    }

    const controls = el(
      doc,
      'ol',
      { class: 'controls' },
      vm.controls.map((control, index) => {
        const button = el(
          doc,
          'button',
          { type: 'button', 'data-action': control.action },
          [control.label + (control.recommended ? ' (suggested)' : '')],
        );
        button.disabled = this.pending;
        button.addEventListener('click', () => {
          this.selection = index;
          this.submitSelected();
        });
        return el(
          doc,
          'li',
          {
            class: `control${index === this.selection ? ' selected' : ''}${
              control.recommended ? ' recommended' : ''
            }`,
          },
          [button],
        );
      }),
    );

    pieces.push(
      el(doc, 'div', { class: 'game-body' }, [
        el(doc, 'div', { class: 'play-area' }, [
          stations,
          el(doc, 'section', { class: 'move-panel' }, [el(doc, 'h3', {}, ['Your move']), controls]),
        ]),
        recipes,
      ]),
    );
    return el(doc, 'main', { class: 'game-screen' }, pieces);
  }

  private renderGameComplete(view: SessionView): HTMLElement {
    const doc = this.doc;
    const logLink = el(
      doc,
      'a',
      { href: this.api.logUrl(view.session_id), class: 'log-link' },
      ['Download the session log'],
    );
    const again = el(doc, 'button', { type: 'button', class: 'restart' }, ['Start another session']);
    again.addEventListener('click', () => this.leaveSession());
    return el(doc, 'main', { class: 'complete-screen' }, [
      el(doc, 'h1', {}, ['Shift complete']),
      el(doc, 'p', {}, ['All five services are done. Thanks for playing.']),
      this.renderBanner(view),
      logLink,
      again,
    ]);
  }

  private renderPreference(view: SessionView): HTMLElement {
    const doc = this.doc;
    const pref = view.preference;
    if (!pref) return el(doc, 'main', {}, ['Loading…']);
    const vm = preferenceViewModel(pref);

    if (view.status === 'complete' || vm.clip === null) {
      const rows = (vm.tally ?? []).map((row) =>
        el(doc, 'tr', {}, [
          el(doc, 'td', {}, [row.modeLabel]),
          el(doc, 'td', { class: 'tally-count' }, [String(row.count)]),
          el(doc, 'td', { class: 'tally-percent' }, [row.percentLabel]),
        ]),
      );
      const again = el(doc, 'button', { type: 'button', class: 'restart' }, [
        'Start another session',
      ]);
      again.addEventListener('click', () => this.leaveSession());
      return el(doc, 'main', { class: 'complete-screen' }, [
        el(doc, 'h1', {}, ['Review complete']),
        el(doc, 'p', {}, [`You voted on all ${vm.total} clips.`]),
        el(doc, 'table', { class: 'tally' }, [el(doc, 'tbody', {}, rows)]),
        again,
      ]);
    }

    const options = el(
      doc,
      'ol',
      { class: 'controls clip-options' },
      vm.clip.options.map((option, index) => {
        const button = el(doc, 'button', { type: 'button', 'data-mode': option.mode }, [
          option.text,
        ]);
        button.disabled = this.pending;
        button.addEventListener('click', () => {
          this.selection = index;
          this.submitSelected();
        });
        return el(
          doc,
          'li',
          { class: `control${index === this.selection ? ' selected' : ''}` },
          [button],
        );
      }),
    );
    return el(doc, 'main', { class: 'preference-screen' }, [
      el(doc, 'h1', {}, ['Which explanation do you prefer?']),
      el(doc, 'p', { class: 'progress' }, [vm.progress]),
      el(doc, 'section', { class: 'clip-card' }, [
        el(doc, 'h3', {}, [vm.clip.title]),
        el(doc, 'p', { class: 'clip-action' }, [`Suggested move: ${vm.clip.actionLabel}`]),
        options,
        el(doc, 'p', { class: 'hint' }, ['Pick with 1-3 or the arrows, then press Enter.']),
      ]),
    ]);
  }
}
