/** Shared helpers for the UI contract tests. */

import { ApiClient } from '../src/api.js';
import type { ResultRow } from '../src/types.js';

export function completeAnswers(overrides: Record<string, unknown> = {}): Record<string, unknown> {
  return {
    first_author: 'Chen',
    pub_year: 2019,
    title: 'A controlled trial',
    study_design: 'between_subjects',
    assignment_randomized: true,
    control_condition: 'usual_care',
    adjusts_for_confounders: false,
    baseline_outcome_controlled: true,
    study_setting: 'retirement community',
    population_description: 'older adults',
    n_enrolled: 40,
    attrition_reported: false,
    intervention_description: 'companion robot sessions',
    outcome_name: 'depression',
    outcome_construct_description: 'depressive symptoms',
    outcome_kind: 'continuous',
    validated_instrument: true,
    measurement_timepoints: 'post',
    all_outcomes_reported: true,
    reports_arm_means: true,
    effect_metric_continuous: 'MD',
    measurement_unit: 'points',
    ...overrides,
  };
}

export function mdResult(y: number, label = 'post'): ResultRow {
  return {
    label,
    effect_kind: 'MD',
    data: { t_mean: y, t_sd: 1, t_n: 50, c_mean: 0, c_sd: 1, c_n: 50 },
  };
}

/** Three complete MD studies (y = 0.2, 0.4, 0.6), flag on the first. */
export async function buildScenario(client: ApiClient): Promise<string[]> {
  const resultIds: string[] = [];
  for (const [index, y] of [0.2, 0.4, 0.6].entries()) {
    const doc = await client.addDocument({
      authors: `Author${index}, A.`,
      year: 2010 + index,
      title: `Trial ${index}`,
    });
    await client.putAnswers(doc.id,
                            completeAnswers({ first_author: `Author${index}` }),
                            [mdResult(y)]);
    await client.patchDocument(doc.id, { review_status: 'complete' });
    const answers = await client.getAnswers(doc.id);
    resultIds.push(...answers.results.map((r) => r.id as string));
  }
  await client.applyAction({
    result_id: resultIds[0],
    kind: 'risk_of_bias',
    choice: 'flag',
    note: 'may not control for baseline depression',
  });
  return resultIds;
}

export async function waitFor(
  predicate: () => boolean | Promise<boolean>,
  timeoutMs = 10000,
  stepMs = 50,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await predicate()) return;
    await new Promise((r) => setTimeout(r, stepMs));
  }
  throw new Error('condition never became true');
}

export function mount(): HTMLElement {
  const root = document.createElement('div');
  root.id = 'app';
  document.body.append(root);
  return root;
}
