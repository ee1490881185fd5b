import type {
  RatingSubmission,
  ScoreboardRow,
  SessionSummary,
  SubmitOutcome,
  TaskView,
} from './types.js';

/** Thin typed client for the rating service; no state beyond the base URL. */
export class RatingApi {
  constructor(private readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listSessions(): Promise<SessionSummary[]> {
    const resp = await fetch(this.url('/api/sessions'));
    if (!resp.ok) throw new Error(`sessions: HTTP ${resp.status}`);
    return resp.json();
  }

  async tasks(sessionId: string, rater: string): Promise<TaskView[]> {
    const resp = await fetch(
      this.url(
        `/api/sessions/${encodeURIComponent(sessionId)}/tasks?rater=${encodeURIComponent(rater)}`,
      ),
    );
    if (!resp.ok) throw new Error(`tasks: HTTP ${resp.status}`);
    return resp.json();
  }

  async submitRating(submission: RatingSubmission): Promise<SubmitOutcome> {
    const resp = await fetch(this.url('/api/ratings'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(submission),
    });
    if (resp.status === 201) return 'created';
    if (resp.status === 409) return 'duplicate';
    if (resp.status === 404) return 'not_found';
    throw new Error(`submit: HTTP ${resp.status}`);
  }

  async scores(sessionId: string): Promise<ScoreboardRow[]> {
    const resp = await fetch(
      this.url(`/api/sessions/${encodeURIComponent(sessionId)}/scores`),
    );
    if (!resp.ok) throw new Error(`scores: HTTP ${resp.status}`);
    return resp.json();
  }
}
