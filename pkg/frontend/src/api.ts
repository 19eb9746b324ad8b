/** Typed client over the service's HTTP interface.
 *
 * Keeps the last-seen revision as the If-Match watermark for mutations.
 * A 409 means another writer got there first; callers surface the
 * reload prompt and re-sync.
 */

import type {
  AnalysisPayload,
  AnnotationPayload,
  AnswersPayload,
  DocumentPayload,
  GroupPayload,
  ProjectPayload,
  QualityAnswerPayload,
  ResultRow,
  SchemaPayload,
  ScopePayload,
  TriageKind,
  TriageTablePayload,
} from './types.js';

export class RevisionConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = 'RevisionConflictError';
  }
}

export class ApiError extends Error {
  status: number;
  ids: string[];

  constructor(status: number, detail: string, ids: string[] = []) {
    super(detail);
    this.name = 'ApiError';
    this.status = status;
    this.ids = ids;
  }
}

export interface AnalysisParams {
  excluded?: string[];
  sort?: 'none' | 'effect';
  units?: 'standardized' | 'original';
  group?: string;
}

export class ApiClient {
  base: string;
  projectId: string;
  revision = 0;

  constructor(base: string, projectId: string) {
    this.base = base.replace(/\/$/, '');
    this.projectId = projectId;
  }

  /** Bind to the first project the server exposes. */
  static async connect(base: string): Promise<ApiClient> {
    const resp = await fetch(`${base.replace(/\/$/, '')}/projects`);
    const projects = (await resp.json()) as { id: string; revision: number }[];
    if (!projects.length) throw new ApiError(404, 'server has no projects');
    const client = new ApiClient(base, projects[0].id);
    client.revision = projects[0].revision;
    return client;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    mutating = false,
  ): Promise<T> {
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (mutating) headers['if-match'] = String(this.revision);
    const resp = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const payload = text ? JSON.parse(text) : {};
    if (resp.status === 409) throw new RevisionConflictError(payload.detail ?? 'stale revision');
    if (!resp.ok) throw new ApiError(resp.status, payload.detail ?? resp.statusText, payload.ids);
    // the revision watermark tracks the last-seen server revision, reads included
    if (typeof payload.revision === 'number') this.revision = payload.revision;
    return payload as T;
  }

  async getProject(): Promise<ProjectPayload> {
    const project = await this.request<ProjectPayload>('GET', `/projects/${this.projectId}`);
    this.revision = project.revision;
    return project;
  }

  getSchema(): Promise<SchemaPayload> {
    return this.request('GET', `/projects/${this.projectId}/schema`);
  }

  getScope(): Promise<ScopePayload> {
    return this.request('GET', `/projects/${this.projectId}/scope`);
  }

  putScope(scope: ScopePayload): Promise<ScopePayload> {
    return this.request('PUT', `/projects/${this.projectId}/scope`, scope, true);
  }

  addDocument(citation: { authors: string; year: number; title: string },
              fileRef?: string): Promise<DocumentPayload & { revision: number }> {
    return this.request('POST', `/projects/${this.projectId}/documents`,
                        { citation, file_ref: fileRef ?? null }, true);
  }

  patchDocument(id: string, patch: {
    review_status?: string;
    provisionally_included?: boolean;
  }): Promise<DocumentPayload & { revision: number }> {
    return this.request('PATCH', `/documents/${id}`, patch, true);
  }

  getAnswers(id: string): Promise<AnswersPayload> {
    return this.request('GET', `/documents/${id}/answers`);
  }

  putAnswers(id: string, answers: Record<string, unknown>,
             results?: ResultRow[]): Promise<AnswersPayload> {
    return this.request('PUT', `/documents/${id}/answers`,
                        { answers, results: results ?? null }, true);
  }

  getQuality(id: string): Promise<{ quality: QualityAnswerPayload[]; revision: number }> {
    return this.request('GET', `/documents/${id}/quality`);
  }

  putQuality(id: string, quality: QualityAnswerPayload[]): Promise<unknown> {
    return this.request('PUT', `/documents/${id}/quality`, { quality }, true);
  }

  getAnnotations(id: string): Promise<{ annotations: AnnotationPayload[] }> {
    return this.request('GET', `/documents/${id}/annotations`);
  }

  addAnnotation(id: string, annotation: Partial<AnnotationPayload>): Promise<unknown> {
    return this.request('POST', `/documents/${id}/annotations`, annotation, true);
  }

  getTriage(kind: TriageKind): Promise<TriageTablePayload> {
    return this.request('GET', `/projects/${this.projectId}/triage/${kind}`);
  }

  applyAction(action: { result_id: string; kind: TriageKind; choice: string;
                        note?: string }): Promise<{ groups: GroupPayload[] }> {
    return this.request('POST', `/projects/${this.projectId}/triage/actions`,
                        action, true);
  }

  getGroups(): Promise<{ groups: GroupPayload[]; revision: number }> {
    return this.request('GET', `/projects/${this.projectId}/groups`);
  }

  editGroups(edit: Record<string, unknown>): Promise<{ groups: GroupPayload[] }> {
    return this.request('POST', `/projects/${this.projectId}/groups/edits`, edit, true);
  }

  getAnalysis(params: AnalysisParams = {}): Promise<AnalysisPayload> {
    const query = new URLSearchParams();
    if (params.excluded?.length) query.set('include', params.excluded.join(','));
    if (params.sort && params.sort !== 'none') query.set('sort', params.sort);
    if (params.units && params.units !== 'standardized') query.set('units', params.units);
    if (params.group) query.set('group', params.group);
    const suffix = query.toString() ? `?${query.toString()}` : '';
    return this.request('GET', `/projects/${this.projectId}/analysis${suffix}`);
  }
}
