/** View state and the controller that mutates it through API calls only.
 *
 * The console computes nothing domain-level: every number stored here is
 * present verbatim in a service response.
 */

import { ApiError, type ApiClient } from './api.js';
import type {
  AttributionPayload,
  ExplanationResponse,
  ExplanationStyle,
  BackendInfo,
  ProfileDraft,
  RecommendationResponse,
} from './types.js';

export interface AttributionView {
  user: AttributionPayload;
  recipe: AttributionPayload;
}

export interface ViewState {
  profileId: string | null;
  session: RecommendationResponse | null;
  selectedRecipeId: string | null;
  contrastRecipeId: string | null;
  selectedBackend: string;
  backends: BackendInfo[];
  attributions: AttributionView | null;
  history: ExplanationResponse[];
  explanationPending: boolean;
  error: string | null;
  fieldErrors: Record<string, string>;
}

export function initialState(): ViewState {
  return {
    profileId: null,
    session: null,
    selectedRecipeId: null,
    contrastRecipeId: null,
    selectedBackend: 'deterministic',
    backends: [],
    attributions: null,
    history: [],
    explanationPending: false,
    error: null,
    fieldErrors: {},
  };
}

/** "age out of range [13, 120]" -> field "age". */
function fieldOf(message: string): string {
  return message.split(' ', 1)[0] ?? '';
}

export class ConsoleController {
  readonly state: ViewState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: ViewState) => void = () => {},
  ) {}

  private notify(): void {
    this.onChange(this.state);
  }

  private fail(error: unknown): void {
    if (error instanceof ApiError) {
      this.state.error = `${error.code}: ${error.message}`;
      const details = error.details as { errors?: string[] } | null;
      if (error.code === 'invalid_profile' && details?.errors) {
        for (const entry of details.errors) {
          this.state.fieldErrors[fieldOf(entry)] = entry;
        }
      }
    } else {
      this.state.error = String(error);
    }
    this.notify();
  }

  async loadBackends(): Promise<void> {
    try {
      this.state.backends = await this.api.listBackends();
      this.notify();
    } catch (error) {
      this.fail(error);
    }
  }

  /** New profile submission starts a fresh session and a fresh history. */
  async submitProfile(draft: ProfileDraft): Promise<void> {
    this.state.error = null;
    this.state.fieldErrors = {};
    try {
      const profileId = await this.api.createProfile(draft);
      const session = await this.api.recommend(profileId, draft.meal_slot);
      this.state.profileId = profileId;
      this.state.session = session;
      this.state.selectedRecipeId = session.recommendations[0]?.recipe_id ?? null;
      this.state.contrastRecipeId = null;
      this.state.attributions = null;
      this.state.history = [];
      this.notify();
    } catch (error) {
      this.fail(error);
    }
  }

  selectRecipe(recipeId: string): void {
    this.state.selectedRecipeId = recipeId;
    this.state.attributions = null;
    this.notify();
  }

  selectContrast(recipeId: string | null): void {
    if (!this.state.session) {
      return; // contrast selection only exists once recommendations do
    }
    this.state.contrastRecipeId = recipeId;
    this.notify();
  }

  switchBackend(backendId: string): void {
    this.state.selectedBackend = backendId;
    this.notify();
  }

  /** Fetch the dual attribution lists for one recipe (not part of history). */
  async showAttributions(recipeId: string): Promise<void> {
    if (!this.state.session || !this.state.profileId) {
      return;
    }
    this.state.error = null;
    try {
      const result = await this.api.explain({
        profile_id: this.state.profileId,
        session_id: this.state.session.session_id,
        recipe_id: recipeId,
        style: 'plain',
        backend_id: 'deterministic',
      });
      this.state.selectedRecipeId = recipeId;
      this.state.attributions = {
        user: result.user_features,
        recipe: result.recipe_features,
      };
      this.notify();
    } catch (error) {
      this.fail(error);
    }
  }

  /** Append one explanation to the session history; one request in flight. */
  async requestExplanation(style: ExplanationStyle, contrastRecipeId?: string): Promise<void> {
    if (this.state.explanationPending) {
      return;
    }
    if (!this.state.session || !this.state.profileId || !this.state.selectedRecipeId) {
      return;
    }
    this.state.error = null;
    this.state.explanationPending = true;
    this.notify();
    try {
      const contrast = style === 'contrastive'
        ? (contrastRecipeId ?? this.state.contrastRecipeId ?? undefined)
        : undefined;
      const result = await this.api.explain({
        profile_id: this.state.profileId,
        session_id: this.state.session.session_id,
        recipe_id: this.state.selectedRecipeId,
        style,
        contrast_recipe_id: contrast,
        backend_id: this.state.selectedBackend,
      });
      this.state.history = [...this.state.history, result];
      if (style === 'contrastive' && contrast) {
        this.state.contrastRecipeId = contrast;
      }
    } catch (error) {
      this.state.explanationPending = false;
      this.fail(error);
      return;
    }
    this.state.explanationPending = false;
    this.notify();
  }
}
