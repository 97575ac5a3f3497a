/** Minimal in-process stand-in for the recommendation service.
 *
 * Speaks the same JSON contracts (including error bodies) and records every
 * prompt it returns so tests can assert verbatim echoes.
 */

import { createServer, type IncomingMessage, type Server, type ServerResponse } from 'node:http';
import type { AddressInfo } from 'node:net';

import type { AttributionPayload } from '../src/types.js';

const RECIPES = [
  { recipe_id: 'r-lentil', name: 'Lentil Soup', score: 0.82, rank: 1 },
  { recipe_id: 'r-falafel', name: 'Falafel Wrap', score: 0.74, rank: 2 },
];

function attribution(origin: 'user' | 'recipe', target: string | number): AttributionPayload {
  const entries =
    origin === 'user'
      ? [
          { origin, feature: 'diet', raw_value: 'vegetarian', phi: 0.5 },
          { origin, feature: 'dislikes_mushroom', raw_value: 1, phi: 0.3 },
          { origin, feature: 'bmr_kcal', raw_value: 1401.5, phi: 0.2 },
        ]
      : [
          { origin, feature: 'protein_g', raw_value: 18, phi: 0.4 },
          { origin, feature: 'fiber_g', raw_value: 12, phi: -0.1 },
        ];
  return { base_value: 0.25, model_output: 0.9, target_class: target, entries };
}

function pairText(payload: AttributionPayload): string {
  return payload.entries.map((e) => `${e.feature}: ${e.raw_value}`).join(', ');
}

function nameOf(recipeId: string): string | undefined {
  return RECIPES.find((r) => r.recipe_id === recipeId)?.name;
}

export interface StubService {
  baseUrl: string;
  returnedPrompts: string[];
  close(): Promise<void>;
}

async function readBody(request: IncomingMessage): Promise<Record<string, unknown>> {
  const chunks: Buffer[] = [];
  for await (const chunk of request) {
    chunks.push(chunk as Buffer);
  }
  return chunks.length ? JSON.parse(Buffer.concat(chunks).toString('utf-8')) : {};
}

function send(response: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  response.writeHead(status, { 'Content-Type': 'application/json' });
  response.end(body);
}

export async function startStubService(): Promise<StubService> {
  const returnedPrompts: string[] = [];

  const server: Server = createServer(async (request, response) => {
    const url = request.url ?? '';
    if (request.method === 'GET' && url === '/backends') {
      send(response, 200, {
        backends: [
          { backend_id: 'deterministic', kind: 'deterministic', model_name: null },
          { backend_id: 'chat-large', kind: 'remote_chat', model_name: 'large-model' },
        ],
      });
      return;
    }
    if (request.method === 'POST' && url === '/profiles') {
      const body = await readBody(request);
      if (typeof body.age === 'number' && body.age < 13) {
        send(response, 422, {
          code: 'invalid_profile',
          message: 'profile validation failed',
          details: { errors: ['age out of range [13, 120]'] },
        });
        return;
      }
      send(response, 201, { profile_id: 'p-stub' });
      return;
    }
    if (request.method === 'POST' && url === '/recommendations') {
      send(response, 200, {
        session_id: 's-000001',
        profile_id: 'p-stub',
        meal_slot: 'lunch',
        meal_budget_kcal: 588.63,
        recommendations: RECIPES.map((r) => ({
          ...r,
          passed_rules: ['R1_allergen', 'R2_diet', 'R3_dislike', 'R4_calorie_budget'],
          meal_budget_kcal: 588.63,
          calories: 520,
          rating: 4.6,
          prep_time_min: 30,
        })),
      });
      return;
    }
    if (request.method === 'POST' && url === '/explanations') {
      const body = await readBody(request);
      const name = nameOf(String(body.recipe_id));
      if (!name) {
        send(response, 404, {
          code: 'unknown_recipe',
          message: `recipe ${String(body.recipe_id)} is not among this session's recommendations`,
          details: null,
        });
        return;
      }
      const userAttr = attribution('user', String(body.recipe_id));
      const recipeAttr = attribution('recipe', 1);
      let prompt: string;
      let contrastUser: AttributionPayload | null = null;
      let contrastRecipe: AttributionPayload | null = null;
      if (body.style === 'contrastive') {
        const contrastName = nameOf(String(body.contrast_recipe_id));
        if (!contrastName) {
          send(response, 400, {
            code: 'style_contrast_mismatch',
            message: 'contrastive requests need contrast_recipe_id',
            details: null,
          });
          return;
        }
        contrastUser = attribution('user', String(body.contrast_recipe_id));
        contrastRecipe = attribution('recipe', 1);
        const pairs = `${pairText(userAttr)}, ${pairText(recipeAttr)}`;
        const contrastPairs = `${pairText(contrastUser)}, ${pairText(contrastRecipe)}`;
        prompt =
          `Convince me that '${name}' is better for me than '${contrastName}', ` +
          `given for '${name}' — ${pairs}; and for '${contrastName}' — ${contrastPairs}`;
      } else {
        prompt = `Convince me that '${name}' is better for me, given ${pairText(userAttr)}, ${pairText(recipeAttr)}`;
      }
      returnedPrompts.push(prompt);
      send(response, 200, {
        text: `${name} suits you: a persuasive stub answer.`,
        prompt,
        backend_id: String(body.backend_id ?? 'deterministic'),
        user_features: userAttr,
        recipe_features: recipeAttr,
        contrast_user_features: contrastUser,
        contrast_recipe_features: contrastRecipe,
        latency_ms: 0,
        deterministic_fallback: false,
      });
      return;
    }
    send(response, 404, { code: 'not_found', message: `no route ${url}`, details: null });
  });

  await new Promise<void>((resolve) => server.listen(0, '127.0.0.1', resolve));
  const { port } = server.address() as AddressInfo;
  return {
    baseUrl: `http://127.0.0.1:${port}`,
    returnedPrompts,
    close: () => new Promise((resolve) => server.close(() => resolve())),
  };
}
