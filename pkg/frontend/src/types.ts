/** JSON shapes returned by the recommendation service. */

export interface ProfileDraft {
  age: number;
  sex: string;
  height_cm: number;
  weight_kg: number;
  activity_level: string;
  diet: string;
  health_goal: string;
  allergens: string[];
  dislikes: string[];
  meal_slot: string;
}

export interface RecommendationEntry {
  recipe_id: string;
  name: string;
  score: number;
  rank: number;
  passed_rules: string[];
  meal_budget_kcal: number;
  calories: number;
  rating: number;
  prep_time_min: number;
}

export interface RecommendationResponse {
  session_id: string;
  profile_id: string;
  meal_slot: string;
  meal_budget_kcal: number;
  recommendations: RecommendationEntry[];
}

export interface AttributionEntry {
  origin: 'user' | 'recipe';
  feature: string;
  raw_value: string | number;
  phi: number;
}

export interface AttributionPayload {
  base_value: number;
  model_output: number;
  target_class: string | number;
  entries: AttributionEntry[];
}

export interface ExplanationResponse {
  text: string;
  prompt: string;
  backend_id: string;
  user_features: AttributionPayload;
  recipe_features: AttributionPayload;
  contrast_user_features: AttributionPayload | null;
  contrast_recipe_features: AttributionPayload | null;
  latency_ms: number;
  deterministic_fallback: boolean;
}

export interface BackendInfo {
  backend_id: string;
  kind: string;
  model_name: string | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: unknown;
}

export type ExplanationStyle = 'plain' | 'contrastive';
