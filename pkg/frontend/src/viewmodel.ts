// Pure projections from service views to render-ready structures. No
// network, no DOM: everything here is a function of the latest view,
// which keeps the rendering layer dumb and the projections testable.
import {
  Clip,
  GameView,
  PreferenceView,
  SessionView,
  StageInfo,
  StageKind,
} from './types.js';

export interface ItemTile {
  name: string;
  label: string;
  notes: string[];
}

export interface StationPanel {
  station: string;
  label: string;
  chefHere: boolean;
  items: ItemTile[];
}

export interface MealChip {
  name: string;
  label: string;
  deadline: number;
  delivered: boolean;
  deliveredAt: number | null;
  late: boolean;
  dueIn: number | null;
}

export interface RecipePart {
  label: string;
  note: string;
}

export interface RecipeEntry {
  meal: string;
  label: string;
  deadline: number;
  parts: RecipePart[];
}

export interface ControlOption {
  action: string;
  label: string;
  recommended: boolean;
}

export interface RecommendationCard {
  action: string;
  actionLabel: string;
  text: string;
}

export interface GameViewModel {
  title: string;
  stage: StageKind;
  clock: number;
  timeLimit: number;
  meterFraction: number;
  stations: StationPanel[];
  meals: MealChip[];
  recipes: RecipeEntry[];
  controls: ControlOption[];
  recommendation: RecommendationCard | null;
}

export interface BannerEntry {
  title: string;
  stage: StageKind;
  status: string;
  current: boolean;
}

export interface ClipViewModel {
  clipId: string;
  title: string;
  actionLabel: string;
  options: { mode: string; modeLabel: string; text: string; hotkey: string }[];
}

export interface TallyRow {
  mode: string;
  modeLabel: string;
  count: number;
  percentLabel: string;
}

export interface PreferenceViewModel {
  cursor: number;
  total: number;
  progress: string;
  clip: ClipViewModel | null;
  tally: TallyRow[] | null;
}

const MODE_LABELS: Record<string, string> = {
  action_only: 'Action only',
  clc: 'Causal link chain',
  subgoal: 'Subgoal',
};

export function modeLabel(mode: string): string {
  return MODE_LABELS[mode] ?? mode;
}

export function stationLabel(station: string): string {
  return station.replace(/Station$/, ' station');
}

// Human phrasing for an action line. `names` maps ingredient and meal
// identifiers to display labels; unknown identifiers pass through, so
// the function degrades gracefully when no catalog is at hand.
export function describeAction(line: string, names?: Map<string, string>): string {
  const words = line.split(' ');
  const name = (word: string) => names?.get(word) ?? word;
  switch (words[0]) {
    case 'move-chef':
      return `Walk to the ${stationLabel(words[3])}`;
    case 'move-item':
      return `Carry the ${name(words[4])} to the ${stationLabel(words[3])}`;
    case 'cut':
      return words[2] === words[3]
        ? `Chop the ${name(words[4])}`
        : `Take the ${name(words[4])} to the ${stationLabel(words[3])} and chop it`;
    case 'start-cook':
      return `Start cooking the ${name(words[3])}`;
    case 'end-cook':
      return `Take the ${name(words[3])} off the heat`;
    case 'prepare-meal':
      return `Plate the ${name(words[3])}`;
    case 'deliver':
      return `Deliver the ${name(words[4])}`;
    default:
      return line;
  }
}

export function displayNames(game: GameView): Map<string, string> {
  const names = new Map<string, string>();
  for (const ingredient of game.ingredients) names.set(ingredient.name, ingredient.display);
  for (const meal of game.meals) names.set(meal.name, meal.display);
  return names;
}

const STATUS_ORDER = ['raw', 'chopped', 'uncooked', 'cooking', 'cooked', 'plated', 'delivered'];

function statusNote(
  word: string,
  entity: string,
  game: GameView,
  durations: Map<string, number | null>,
): string {
  if (word === 'raw') return 'needs chopping';
  if (word === 'uncooked') return 'not cooked yet';
  if (word === 'cooking') {
    const start = game.cooking[entity];
    const duration = durations.get(entity);
    if (start !== undefined && typeof duration === 'number') {
      return `cooking, ${Math.max(duration - (game.clock - start), 0)} to go`;
    }
    return 'cooking';
  }
  return word;
}

export function gameViewModel(game: GameView): GameViewModel {
  const names = displayNames(game);
  const durations = new Map(game.ingredients.map((i) => [i.name, i.cook_duration]));

  const location = new Map<string, string>();
  const statuses = new Map<string, string[]>();
  for (const fluent of game.fluents) {
    const words = fluent.split(' ');
    if (words[0] === 'at') {
      location.set(words[1], words[2]);
    } else if (STATUS_ORDER.includes(words[0])) {
      const existing = statuses.get(words[1]) ?? [];
      existing.push(words[0]);
      statuses.set(words[1], existing);
    }
  }

  const tileFor = (entity: string): ItemTile => {
    const words = (statuses.get(entity) ?? [])
      .slice()
      .sort((a, b) => STATUS_ORDER.indexOf(a) - STATUS_ORDER.indexOf(b));
    const notes = words.map((w) => statusNote(w, entity, game, durations));
    return {
      name: entity,
      label: names.get(entity) ?? entity,
      notes: notes.length > 0 ? notes : ['ready'],
    };
  };

  const stations: StationPanel[] = game.stations.map((station) => {
    const here = [...location.entries()]
      .filter(([entity, at]) => entity !== 'chef' && at === station)
      .map(([entity]) => entity)
      .sort();
    return {
      station,
      label: stationLabel(station),
      chefHere: location.get('chef') === station,
      items: here.map(tileFor),
    };
  });

  const meals: MealChip[] = game.meals.map((meal) => ({
    name: meal.name,
    label: meal.display,
    deadline: meal.deadline,
    delivered: meal.delivered,
    deliveredAt: meal.delivered_at,
    late: meal.delivered ? (meal.delivered_at ?? 0) > meal.deadline : game.clock > meal.deadline,
    dueIn: meal.delivered ? null : meal.deadline - game.clock,
  }));

  const recipes: RecipeEntry[] = game.meals.map((meal) => ({
    meal: meal.name,
    label: meal.display,
    deadline: meal.deadline,
    parts: meal.ingredients.map((ingredientName) => {
      const info = game.ingredients.find((i) => i.name === ingredientName);
      const steps: string[] = [];
      if (info?.needs_chop) steps.push('chop');
      if (typeof info?.cook_duration === 'number') steps.push(`cook for ${info.cook_duration}`);
      return {
        label: info?.display ?? ingredientName,
        note: steps.length > 0 ? steps.join(', then ') : 'as is',
      };
    }),
  }));

  const controls: ControlOption[] = game.legal_actions.map((action) => ({
    action,
    label: describeAction(action, names),
    recommended: game.recommendation?.action === action,
  }));

  return {
    title: game.title,
    stage: game.stage,
    clock: game.clock,
    timeLimit: game.time_limit,
    meterFraction: Math.min(game.clock / game.time_limit, 1),
    stations,
    meals,
    recipes,
    controls,
    recommendation:
      game.recommendation === null
        ? null
        : {
            action: game.recommendation.action,
            actionLabel: describeAction(game.recommendation.action, names),
            text: game.recommendation.text,
          },
  };
}

export function sessionBanner(view: SessionView): BannerEntry[] {
  const stages: StageInfo[] = view.stages ?? [];
  return stages.map((stage, index) => ({
    title: stage.title,
    stage: stage.stage,
    status: stage.status,
    current: view.status === 'active' && index === (view.stage_index ?? -1),
  }));
}

function clipViewModel(clip: Clip): ClipViewModel {
  return {
    clipId: clip.clip_id,
    title: `${clip.game_title}, step ${clip.step_index + 1}`,
    actionLabel: describeAction(clip.action),
    options: clip.options.map((option, index) => ({
      mode: option.mode,
      modeLabel: modeLabel(option.mode),
      text: option.text,
      hotkey: String(index + 1),
    })),
  };
}

function formatPercent(value: number): string {
  const rounded = Math.round(value * 10) / 10;
  return Number.isInteger(rounded) ? `${rounded}%` : `${rounded.toFixed(1)}%`;
}

export function preferenceViewModel(pref: PreferenceView): PreferenceViewModel {
  let tally: TallyRow[] | null = null;
  if (pref.tally !== null) {
    const total = Object.values(pref.tally).reduce((a, b) => a + b, 0);
    tally = Object.entries(pref.tally)
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([mode, count]) => ({
        mode,
        modeLabel: modeLabel(mode),
        count,
        percentLabel: formatPercent(total === 0 ? 0 : (100 * count) / total),
      }));
  }
  return {
    cursor: pref.cursor,
    total: pref.total,
    progress: `Clip ${Math.min(pref.cursor + 1, pref.total)} of ${pref.total}`,
    clip: pref.clip === null ? null : clipViewModel(pref.clip),
    tally,
  };
}
