import { RatingApi } from './api.js';
import { RatingQueue } from './queue.js';
import { renderScoreboard } from './scoreboard.js';
import type { RatingCategory } from './types.js';
import { CATEGORIES, CATEGORY_POINTS } from './types.js';

const RATER_KEY = 'cloneaug.rater_id';

export function getRaterId(storage: Storage): string {
  let rater = storage.getItem(RATER_KEY);
  if (!rater) {
    rater = `rater-${Math.random().toString(36).slice(2, 8)}`;
    storage.setItem(RATER_KEY, rater);
  }
  return rater;
}

export function setRaterId(storage: Storage, rater: string): void {
  storage.setItem(RATER_KEY, rater);
}

export interface AppOptions {
  /** disabled in tests: jsdom cannot actually play audio */
  autoplay?: boolean;
}

/** Task-queue screen: audio player, three category buttons, progress. */
export class QueueScreen {
  constructor(
    private readonly root: HTMLElement,
    private readonly queue: RatingQueue,
    private readonly options: AppOptions = {},
  ) {}

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = '';
    const progress = this.queue.progress();
    const header = doc.createElement('div');
    header.className = 'progress';
    header.textContent = `${progress.done}/${progress.total} rated`;
    this.root.appendChild(header);

    const noticeBox = doc.createElement('div');
    noticeBox.className = 'notice';
    const notice = this.queue.notice;
    if (notice?.kind === 'duplicate') {
      noticeBox.textContent = 'already rated';
      noticeBox.classList.add('notice-duplicate');
    } else if (notice?.kind === 'error') {
      noticeBox.textContent = `not saved: ${notice.message}`;
      noticeBox.classList.add('notice-error');
    }
    this.root.appendChild(noticeBox);

    const task = this.queue.current();
    if (task === null) {
      const finished = doc.createElement('p');
      finished.className = 'finished';
      finished.textContent = 'all tasks rated';
      this.root.appendChild(finished);
      return;
    }

    const info = doc.createElement('p');
    info.className = 'task-info';
    info.textContent =
      `${task.combination_name} | ${task.audio_kind} | ` +
      `${task.duration_class} (${task.duration.toFixed(2)} s)`;
    this.root.appendChild(info);

    const audio = doc.createElement('audio');
    audio.setAttribute('controls', '');
    audio.src = task.audio_url;
    this.root.appendChild(audio);
    if (this.options.autoplay) {
      void audio.play()?.catch(() => undefined);
    }

    const buttons = doc.createElement('div');
    buttons.className = 'buttons';
    CATEGORIES.forEach((category, index) => {
      const button = doc.createElement('button');
      button.dataset.category = category;
      button.textContent = `${index + 1} ${category} (${CATEGORY_POINTS[category]} pt)`;
      button.addEventListener('click', () => void this.rate(category));
      buttons.appendChild(button);
    });
    this.root.appendChild(buttons);
  }

  async rate(category: RatingCategory): Promise<void> {
    await this.queue.rateCurrent(category);
    this.render();
  }

  /** Keyboard shortcuts 1/2/3 -> poor/reasonable/good. */
  handleKey(key: string): Promise<void> | undefined {
    const index = ['1', '2', '3'].indexOf(key);
    if (index === -1 || this.queue.isFinished()) return undefined;
    return this.rate(CATEGORIES[index]);
  }
}

export class ScoreboardScreen {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: RatingApi,
    private readonly sessionId: string,
  ) {}

  async refresh(): Promise<void> {
    const rows = await this.api.scores(this.sessionId);
    renderScoreboard(this.root, rows);
  }
}

export async function startApp(
  doc: Document,
  baseUrl = '',
  options: AppOptions = { autoplay: true },
): Promise<void> {
  const api = new RatingApi(baseUrl);
  const root = doc.getElementById('app');
  if (!root) throw new Error('missing #app container');
  const win = doc.defaultView;
  const rater = getRaterId(win!.localStorage);

  const sessions = await api.listSessions();
  if (sessions.length === 0) {
    root.textContent = 'no sessions; create one with `cloneaug rate-serve --create`';
    return;
  }
  const sessionId = sessions[0].session_id;
  const tasks = await api.tasks(sessionId, rater);
  const queue = new RatingQueue(api, sessionId, rater, tasks);

  const queueRoot = doc.createElement('section');
  queueRoot.id = 'queue';
  const scoreRoot = doc.createElement('section');
  scoreRoot.id = 'scores';
  root.textContent = '';
  root.appendChild(queueRoot);
  root.appendChild(scoreRoot);

  const queueScreen = new QueueScreen(queueRoot, queue, options);
  const scoreboard = new ScoreboardScreen(scoreRoot, api, sessionId);

  const rerender = async () => {
    queueScreen.render();
    await scoreboard.refresh();
  };
  win!.addEventListener('keydown', (event: KeyboardEvent) => {
    const pending = queueScreen.handleKey(event.key);
    if (pending) void pending.then(() => scoreboard.refresh());
  });
  queueRoot.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (target.tagName === 'BUTTON') void scoreboard.refresh();
  });
  await rerender();
}
