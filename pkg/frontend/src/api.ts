/** Typed client over the service endpoints; all errors surface as ApiError. */

import type {
  ApiErrorBody,
  BackendInfo,
  ExplanationResponse,
  ProfileDraft,
  RecommendationResponse,
} from './types.js';

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: unknown;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.details = body.details;
  }
}

export interface ExplanationRequestBody {
  profile_id: string;
  session_id?: string;
  recipe_id: string;
  style: 'plain' | 'contrastive';
  contrast_recipe_id?: string;
  top_k?: number;
  backend_id?: string;
}

export interface ApiClient {
  createProfile(draft: ProfileDraft): Promise<string>;
  recommend(profileId: string, mealSlot?: string, topK?: number): Promise<RecommendationResponse>;
  explain(body: ExplanationRequestBody): Promise<ExplanationResponse>;
  listBackends(): Promise<BackendInfo[]>;
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody = {
    code: 'unknown_error',
    message: `HTTP ${response.status}`,
    details: null,
  };
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // keep the fallback body when the payload is not our error shape
  }
  return new ApiError(response.status, body);
}

export class HttpApiClient implements ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  async createProfile(draft: ProfileDraft): Promise<string> {
    const body = await this.request<{ profile_id: string }>('/profiles', {
      method: 'POST',
      body: JSON.stringify(draft),
    });
    return body.profile_id;
  }

  recommend(profileId: string, mealSlot?: string, topK?: number): Promise<RecommendationResponse> {
    return this.request('/recommendations', {
      method: 'POST',
      body: JSON.stringify({ profile_id: profileId, meal_slot: mealSlot, top_k: topK }),
    });
  }

  explain(body: ExplanationRequestBody): Promise<ExplanationResponse> {
    return this.request('/explanations', { method: 'POST', body: JSON.stringify(body) });
  }

  async listBackends(): Promise<BackendInfo[]> {
    const body = await this.request<{ backends: BackendInfo[] }>('/backends');
    return body.backends;
  }
}
