import { afterAll, beforeAll, beforeEach, describe, expect, it } from 'vitest';

import { HttpApiClient } from '../src/api.js';
import { ConsoleController } from '../src/state.js';
import type { ProfileDraft } from '../src/types.js';
import { startStubService, type StubService } from './stub_service.js';

const DRAFT: ProfileDraft = {
  age: 30,
  sex: 'female',
  height_cm: 170,
  weight_kg: 65,
  activity_level: 'sedentary',
  diet: 'vegetarian',
  health_goal: 'maintenance',
  allergens: [],
  dislikes: ['mushroom'],
  meal_slot: 'lunch',
};

let stub: StubService;

beforeAll(async () => {
  stub = await startStubService();
});

afterAll(async () => {
  await stub.close();
});

function makeController(): ConsoleController {
  return new ConsoleController(new HttpApiClient(stub.baseUrl));
}

beforeEach(() => {
  stub.returnedPrompts.length = 0;
});

describe('console flow', () => {
  it('submit profile, open attributions, then plain and contrastive explanations', async () => {
    const controller = makeController();

    await controller.submitProfile(DRAFT);
    expect(controller.state.error).toBeNull();
    expect(controller.state.session?.recommendations.map((r) => r.name)).toEqual([
      'Lentil Soup',
      'Falafel Wrap',
    ]);
    expect(controller.state.selectedRecipeId).toBe('r-lentil');
    expect(controller.state.history).toHaveLength(0);

    await controller.showAttributions('r-lentil');
    expect(controller.state.attributions?.user.entries[0]).toMatchObject({
      feature: 'diet',
      raw_value: 'vegetarian',
      phi: 0.5,
    });
    expect(controller.state.attributions?.recipe.entries[0].feature).toBe('protein_g');
    expect(controller.state.history).toHaveLength(0); // attribution peek is not history

    await controller.requestExplanation('plain');
    controller.selectContrast('r-falafel');
    await controller.requestExplanation('contrastive', 'r-falafel');

    expect(controller.state.history).toHaveLength(2);
    const [plainEntry, contrastiveEntry] = controller.state.history;
    // Prompts must be verbatim service echoes (attribution peek included).
    expect(stub.returnedPrompts).toEqual([
      stub.returnedPrompts[0],
      plainEntry.prompt,
      contrastiveEntry.prompt,
    ]);
    expect(plainEntry.prompt).toContain("Convince me that 'Lentil Soup' is better for me, given");
    expect(contrastiveEntry.prompt).toContain("better for me than 'Falafel Wrap'");
    expect(contrastiveEntry.contrast_user_features).not.toBeNull();
  });

  it('keeps at most one explanation request in flight', async () => {
    const controller = makeController();
    await controller.submitProfile(DRAFT);

    const first = controller.requestExplanation('plain');
    const second = controller.requestExplanation('plain'); // dropped while pending
    await Promise.all([first, second]);

    expect(controller.state.history).toHaveLength(1);
    expect(controller.state.explanationPending).toBe(false);
  });

  it('binds validation errors to form fields', async () => {
    const controller = makeController();
    await controller.submitProfile({ ...DRAFT, age: 5 });
    expect(controller.state.session).toBeNull();
    expect(controller.state.error).toContain('invalid_profile');
    expect(controller.state.fieldErrors.age).toContain('age out of range');
  });

  it('renders API errors with their machine-readable message', async () => {
    const controller = makeController();
    await controller.submitProfile(DRAFT);
    await controller.showAttributions('r-ghost');
    expect(controller.state.error).toContain('unknown_recipe');
  });

  it('starts a fresh history when a new profile is submitted', async () => {
    const controller = makeController();
    await controller.submitProfile(DRAFT);
    await controller.requestExplanation('plain');
    expect(controller.state.history).toHaveLength(1);

    await controller.submitProfile(DRAFT);
    expect(controller.state.history).toHaveLength(0);
  });

  it('ignores contrast selection before any recommendations exist', async () => {
    const controller = makeController();
    controller.selectContrast('r-falafel');
    expect(controller.state.contrastRecipeId).toBeNull();
  });

  it('lists backends and switches between them', async () => {
    const controller = makeController();
    await controller.loadBackends();
    expect(controller.state.backends.map((b) => b.backend_id)).toEqual([
      'deterministic',
      'chat-large',
    ]);
    controller.switchBackend('chat-large');
    await controller.submitProfile(DRAFT);
    await controller.requestExplanation('plain');
    expect(controller.state.history[0].backend_id).toBe('chat-large');
  });
});
