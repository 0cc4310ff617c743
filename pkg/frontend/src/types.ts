// Wire types for the study service, as zod schemas. Every payload that
// enters the app is parsed through one of these, and zod strips any key
// a schema does not declare, so fields the client has no business with
// (there are none today, but the server is the authority) can never
// reach application state.
import { z } from 'zod';

export const ingredientInfoSchema = z.object({
  name: z.string(),
  display: z.string(),
  needs_chop: z.boolean(),
  cook_duration: z.number().int().nullable(),
});

export const mealInfoSchema = z.object({
  name: z.string(),
  display: z.string(),
  deadline: z.number().int(),
  ingredients: z.array(z.string()),
  delivered: z.boolean(),
  delivered_at: z.number().int().nullable(),
});

export const recommendationSchema = z.object({
  action: z.string(),
  mode: z.enum(['action_only', 'clc', 'subgoal']),
  text: z.string(),
});

export const gameEventSchema = z.object({
  kind: z.string(),
  at_cost: z.number().int(),
  data: z.record(z.unknown()),
});

export const stageKindSchema = z.enum(['familiarization', 'advised', 'assessment']);

export const gameViewSchema = z.object({
  game_id: z.string(),
  title: z.string(),
  stage: stageKindSchema,
  mode: z.enum(['none', 'action_only', 'clc', 'subgoal']),
  seq: z.number().int(),
  clock: z.number().int(),
  time_limit: z.number().int(),
  stations: z.array(z.string()),
  fluents: z.array(z.string()),
  cooking: z.record(z.number().int()),
  ingredients: z.array(ingredientInfoSchema),
  meals: z.array(mealInfoSchema),
  legal_actions: z.array(z.string()),
  recommendation: recommendationSchema.nullable(),
  last_events: z.array(gameEventSchema),
});

export const stageInfoSchema = z.object({
  stage: stageKindSchema,
  game_id: z.string(),
  title: z.string(),
  status: z.string(),
});

export const clipOptionSchema = z.object({
  mode: z.enum(['action_only', 'clc', 'subgoal']),
  text: z.string(),
});

export const clipSchema = z.object({
  clip_id: z.string(),
  game_id: z.string(),
  game_title: z.string(),
  step_index: z.number().int(),
  action: z.string(),
  options: z.array(clipOptionSchema),
});

export const preferenceViewSchema = z.object({
  cursor: z.number().int(),
  total: z.number().int(),
  seq: z.number().int(),
  clip: clipSchema.nullable(),
  tally: z.record(z.number().int()).nullable(),
});

export const sessionViewSchema = z.object({
  session_id: z.string(),
  kind: z.enum(['game', 'preference']),
  status: z.enum(['active', 'complete']),
  stage_index: z.number().int().optional(),
  stages: z.array(stageInfoSchema).optional(),
  game: gameViewSchema.nullable().optional(),
  preference: preferenceViewSchema.optional(),
});

export const catalogMealSchema = z.object({
  name: z.string(),
  display: z.string(),
  deadline: z.number().int(),
  ingredients: z.array(z.string()),
});

export const catalogGameSchema = z.object({
  game_id: z.string(),
  title: z.string(),
  stations: z.array(z.string()),
  time_limit: z.number().int(),
  ingredients: z.array(ingredientInfoSchema),
  meals: z.array(catalogMealSchema),
});

export type IngredientInfo = z.infer<typeof ingredientInfoSchema>;
export type MealInfo = z.infer<typeof mealInfoSchema>;
export type Recommendation = z.infer<typeof recommendationSchema>;
export type GameEvent = z.infer<typeof gameEventSchema>;
export type StageKind = z.infer<typeof stageKindSchema>;
export type GameView = z.infer<typeof gameViewSchema>;
export type StageInfo = z.infer<typeof stageInfoSchema>;
export type ClipOption = z.infer<typeof clipOptionSchema>;
export type Clip = z.infer<typeof clipSchema>;
export type PreferenceView = z.infer<typeof preferenceViewSchema>;
export type SessionView = z.infer<typeof sessionViewSchema>;
export type CatalogMeal = z.infer<typeof catalogMealSchema>;
export type CatalogGame = z.infer<typeof catalogGameSchema>;

// Ordering key for merging views that arrive from both submit responses
// and the push channel: a view strictly newer than the current one wins,
// anything else is dropped. Stage index dominates the per-stage action
// counter because each stage restarts its sequence at zero.
export function viewClock(view: SessionView): [number, number, number] {
  const done = view.status === 'complete' ? 1 : 0;
  if (view.kind === 'preference') {
    return [done, 0, view.preference?.seq ?? 0];
  }
  return [done, view.stage_index ?? 0, view.game?.seq ?? Number.MAX_SAFE_INTEGER];
}

export function isNewerView(candidate: SessionView, current: SessionView | null): boolean {
  if (current === null) return true;
  const a = viewClock(candidate);
  const b = viewClock(current);
  for (let i = 0; i < a.length; i++) {
    if (a[i] !== b[i]) return a[i] > b[i];
  }
  return false;
}
