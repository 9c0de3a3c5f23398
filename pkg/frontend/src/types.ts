/** Wire types of the exercise service API. */

export interface ScoreboardRow {
  team_id: string;
  display_name: string;
  totals: Record<string, number>;
  total: number;
}

export interface Scoreboard {
  exercise_id: string;
  as_of: number;
  rows: ScoreboardRow[];
}

export type DotColor = "red" | "white" | "yellow" | "grey";

export interface TimelineDot {
  event_id: string;
  at: number;
  points: number;
  color: DotColor;
  title: string;
  tooltip: string;
  reflection_option_ids: string[];
  recorded_late: boolean;
}

export interface TimelineModel {
  team_id: string;
  range: { start: number; end: number };
  curve: [number, number][];
  dots: TimelineDot[];
}

export interface ReflectionOption {
  option_id: string;
  label: string;
  free_text: boolean;
}

export interface SurveyItem {
  item_id: string;
  statement: string;
  kind: "likert5" | "free_text";
}

export interface SurveyDef {
  survey_id: string;
  title: string;
  items: SurveyItem[];
}

export interface ExerciseInfo {
  exercise: {
    exercise_id: string;
    name: string;
    initial_score: number;
    start_at: number;
    duration: number;
    teams: { team_id: string; display_name: string }[];
  };
  reflection_options: Record<string, ReflectionOption[]>;
  surveys: SurveyDef[];
  timeline_visible_from: number | null;
}

export type InteractionKind = "click" | "hover" | "move";

export interface InteractionEventWire {
  session_id: string;
  learner_id: string;
  team_id: string;
  kind: InteractionKind;
  x: number;
  y: number;
  viewport: { width: number; height: number };
  at: number;
  target?: string;
}

export interface AnswerWire {
  survey_id?: string;
  item_id: string;
  value: number | string;
  respondent_id?: string;
  team_id?: string;
}

export interface Identity {
  role: string;
  team_id: string | null;
  learner_id: string;
}
