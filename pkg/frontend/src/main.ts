/** Bootstrap: state-driven re-render of the console against the service. */

import { HttpApiClient } from './api.js';
import { el, renderBarList } from './render.js';
import { ConsoleController, type ViewState } from './state.js';
import type { ProfileDraft } from './types.js';

const ACTIVITY_LEVELS = ['sedentary', 'light', 'moderate', 'active', 'very_active'];
const DIETS = ['omnivore', 'pescatarian', 'vegetarian', 'vegan'];
const GOALS = ['weight_loss', 'maintenance', 'muscle_gain'];
const MEAL_SLOTS = ['breakfast', 'lunch', 'dinner', 'snack'];

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app container');
}

const controller = new ConsoleController(new HttpApiClient(''), render);

function tokenList(value: string): string[] {
  return value
    .split(',')
    .map((token) => token.trim())
    .filter((token) => token.length > 0);
}

function readDraft(form: HTMLFormElement): ProfileDraft {
  const data = new FormData(form);
  const text = (name: string) => String(data.get(name) ?? '');
  return {
    age: Number(text('age')),
    sex: text('sex'),
    height_cm: Number(text('height_cm')),
    weight_kg: Number(text('weight_kg')),
    activity_level: text('activity_level'),
    diet: text('diet'),
    health_goal: text('health_goal'),
    allergens: tokenList(text('allergens')),
    dislikes: tokenList(text('dislikes')),
    meal_slot: text('meal_slot'),
  };
}

function selectField(name: string, options: string[], selected?: string): HTMLElement {
  const wrap = el('label', 'field', `${name.replace('_', ' ')} `);
  const select = el('select');
  select.name = name;
  for (const option of options) {
    const node = el('option', undefined, option);
    node.value = option;
    if (option === selected) {
      node.selected = true;
    }
    select.appendChild(node);
  }
  wrap.appendChild(select);
  return wrap;
}

function numberField(name: string, value: number, fieldErrors: Record<string, string>): HTMLElement {
  const wrap = el('label', 'field', `${name.replace('_', ' ')} `);
  const input = el('input');
  input.name = name;
  input.type = 'number';
  input.step = 'any';
  input.value = String(value);
  wrap.appendChild(input);
  if (fieldErrors[name]) {
    wrap.appendChild(el('span', 'field-error', fieldErrors[name]));
  }
  return wrap;
}

function textField(name: string, placeholder: string): HTMLElement {
  const wrap = el('label', 'field', `${name} `);
  const input = el('input');
  input.name = name;
  input.type = 'text';
  input.placeholder = placeholder;
  wrap.appendChild(input);
  return wrap;
}

function renderProfileForm(state: ViewState): HTMLElement {
  const section = el('section', 'panel');
  section.appendChild(el('h2', undefined, 'Your profile'));
  const form = el('form');
  form.append(
    numberField('age', 30, state.fieldErrors),
    selectField('sex', ['female', 'male']),
    numberField('height_cm', 170, state.fieldErrors),
    numberField('weight_kg', 65, state.fieldErrors),
    selectField('activity_level', ACTIVITY_LEVELS),
    selectField('diet', DIETS, 'vegetarian'),
    selectField('health_goal', GOALS, 'maintenance'),
    textField('allergens', 'comma-separated, e.g. peanut'),
    textField('dislikes', 'comma-separated, e.g. mushroom'),
    selectField('meal_slot', MEAL_SLOTS, 'lunch'),
  );
  const submit = el('button', 'primary', 'Get recommendations');
  submit.type = 'submit';
  form.appendChild(submit);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void controller.submitProfile(readDraft(form));
  });
  section.appendChild(form);
  return section;
}

function renderRecommendations(state: ViewState): HTMLElement {
  const section = el('section', 'panel');
  section.appendChild(el('h2', undefined, 'Recommendations'));
  if (!state.session) {
    section.appendChild(el('p', 'hint', 'Submit your profile to see ranked recipes.'));
    return section;
  }
  section.appendChild(
    el('p', 'hint', `Meal budget: ${state.session.meal_budget_kcal.toFixed(1)} kcal`),
  );
  for (const rec of state.session.recommendations) {
    const selected = rec.recipe_id === state.selectedRecipeId;
    const card = el('div', selected ? 'card selected' : 'card');
    card.appendChild(el('h3', undefined, `#${rec.rank} ${rec.name}`));
    card.appendChild(
      el(
        'p',
        'hint',
        `score ${rec.score.toFixed(3)} | ${rec.calories} kcal | rating ${rec.rating} | ${rec.prep_time_min} min`,
      ),
    );
    const actions = el('div', 'actions');
    const pick = el('button', undefined, selected ? 'Selected' : 'Select');
    pick.addEventListener('click', () => controller.selectRecipe(rec.recipe_id));
    actions.appendChild(pick);
    const why = el('button', undefined, 'Why this?');
    why.addEventListener('click', () => void controller.showAttributions(rec.recipe_id));
    actions.appendChild(why);
    if (!selected) {
      const contrast = el('button', undefined, 'Why not this one?');
      contrast.disabled = state.explanationPending;
      contrast.addEventListener('click', () => {
        controller.selectContrast(rec.recipe_id);
        void controller.requestExplanation('contrastive', rec.recipe_id);
      });
      actions.appendChild(contrast);
    }
    card.appendChild(actions);
    section.appendChild(card);
  }
  return section;
}

function renderAttributions(state: ViewState): HTMLElement {
  const section = el('section', 'panel');
  section.appendChild(el('h2', undefined, 'Why this recipe?'));
  if (!state.attributions) {
    section.appendChild(el('p', 'hint', 'Pick "Why this?" on a recipe to see feature influence.'));
    return section;
  }
  const wrap = el('div', 'attribution-columns');
  wrap.append(
    renderBarList('About you', state.attributions.user.entries),
    renderBarList('About the recipe', state.attributions.recipe.entries),
  );
  section.appendChild(wrap);
  return section;
}

function renderExplanations(state: ViewState): HTMLElement {
  const section = el('section', 'panel');
  section.appendChild(el('h2', undefined, 'Explanations'));

  const controls = el('div', 'actions');
  const backendSelect = el('select');
  for (const backend of state.backends) {
    const option = el('option', undefined, backend.backend_id);
    option.value = backend.backend_id;
    option.selected = backend.backend_id === state.selectedBackend;
    backendSelect.appendChild(option);
  }
  backendSelect.addEventListener('change', () => controller.switchBackend(backendSelect.value));
  controls.appendChild(backendSelect);

  const explain = el('button', 'primary', state.explanationPending ? 'Working on it' : 'Explain my top pick');
  explain.disabled = state.explanationPending || !state.session;
  explain.addEventListener('click', () => void controller.requestExplanation('plain'));
  controls.appendChild(explain);
  section.appendChild(controls);

  const history = el('div', 'history');
  for (const entry of [...state.history].reverse()) {
    const item = el('div', 'history-entry');
    item.appendChild(
      el('p', 'hint', `${entry.backend_id}${entry.deterministic_fallback ? ' (fallback)' : ''}`),
    );
    item.appendChild(el('p', 'prompt', entry.prompt));
    item.appendChild(el('p', 'text', entry.text));
    history.appendChild(item);
  }
  section.appendChild(history);
  return section;
}

function render(state: ViewState): void {
  if (!root) {
    return;
  }
  root.replaceChildren();
  if (state.error) {
    root.appendChild(el('div', 'error-banner', state.error));
  }
  root.append(
    renderProfileForm(state),
    renderRecommendations(state),
    renderAttributions(state),
    renderExplanations(state),
  );
}

render(controller.state);
void controller.loadBackends();
