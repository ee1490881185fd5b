import type { RatingApi } from './api.js';
import type { RatingCategory, TaskView } from './types.js';

export type QueueNotice =
  | { kind: 'duplicate'; taskId: string }
  | { kind: 'error'; message: string }
  | null;

/**
 * Task-queue state for one rater: serves the first uncompleted task, posts
 * exactly one rating per action, and only advances once the service accepts
 * (or reports a duplicate, which means the task is already done server-side).
 * A failed POST leaves the task uncompleted so it can be retried.
 */
export class RatingQueue {
  notice: QueueNotice = null;

  constructor(
    private readonly api: RatingApi,
    readonly sessionId: string,
    readonly raterId: string,
    private tasks: TaskView[],
  ) {}

  current(): TaskView | null {
    return this.tasks.find((t) => !t.completed) ?? null;
  }

  progress(): { done: number; total: number } {
    return {
      done: this.tasks.filter((t) => t.completed).length,
      total: this.tasks.length,
    };
  }

  allTasks(): readonly TaskView[] {
    return this.tasks;
  }

  isFinished(): boolean {
    return this.current() === null;
  }

  /** Rate the current task; returns true when the queue advanced. */
  async rateCurrent(category: RatingCategory): Promise<boolean> {
    const task = this.current();
    if (task === null) return false;
    let outcome;
    try {
      outcome = await this.api.submitRating({
        session_id: this.sessionId,
        task_id: task.task_id,
        rater_id: this.raterId,
        category,
      });
    } catch (err) {
      this.notice = { kind: 'error', message: String(err) };
      return false; // stays uncompleted; the rater can retry
    }
    if (outcome === 'created') {
      this.notice = null;
      task.completed = true;
      return true;
    }
    if (outcome === 'duplicate') {
      // already rated server-side (another tab or a retry): show the
      // notice, sync local state, and move on without changing any score
      this.notice = { kind: 'duplicate', taskId: task.task_id };
      task.completed = true;
      return true;
    }
    this.notice = { kind: 'error', message: `unknown task ${task.task_id}` };
    return false;
  }
}
