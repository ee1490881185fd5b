export type RatingCategory = 'poor' | 'reasonable' | 'good';
export type DurationClass = 'standard' | 'long';

export interface SessionSummary {
  session_id: string;
  num_tasks: number;
  combinations: string[];
  sample_size: number;
  seed: number;
  long_threshold_ratio: number;
}

export interface TaskView {
  task_id: string;
  combination_name: string;
  audio_id: string;
  audio_url: string;
  audio_kind: 'reference' | 'generated';
  duration_class: DurationClass;
  duration: number;
  completed: boolean;
}

export interface ScoreboardRow {
  combination_name: string;
  num_rated: number;
  score: number;
  by_duration_class: Record<DurationClass, Record<RatingCategory, number>>;
}

export interface RatingSubmission {
  session_id: string;
  task_id: string;
  rater_id: string;
  category: RatingCategory;
}

export type SubmitOutcome = 'created' | 'duplicate' | 'not_found';

export const CATEGORY_POINTS: Record<RatingCategory, number> = {
  poor: 1,
  reasonable: 2,
  good: 3,
};

export const CATEGORIES: RatingCategory[] = ['poor', 'reasonable', 'good'];
