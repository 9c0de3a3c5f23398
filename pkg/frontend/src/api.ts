/** Thin typed client for the exercise service. The token from login is
 * attached to every request; the client never computes scores itself. */

import type {
  AnswerWire,
  ExerciseInfo,
  InteractionEventWire,
  Scoreboard,
  SurveyDef,
  TimelineModel,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string | null = null,
  ) {}

  private headers(json: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let payload: unknown = null;
    const text = await response.text();
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = text;
      }
    }
    if (!response.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? (payload as { detail: unknown }).detail
          : payload;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }

  post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }

  me(): Promise<{ credential_id: string; role: string; team_id: string | null }> {
    return this.get("/api/me");
  }

  exercise(): Promise<ExerciseInfo> {
    return this.get("/api/exercise");
  }

  scoreboard(): Promise<Scoreboard> {
    return this.get("/api/scoreboard");
  }

  timeline(teamId: string): Promise<TimelineModel> {
    return this.get(`/api/teams/${teamId}/timeline`);
  }

  survey(surveyId: string): Promise<SurveyDef> {
    return this.get(`/api/surveys/${surveyId}`);
  }

  postReflection(body: {
    event_id: string;
    learner_id: string;
    option_id: string;
    free_text?: string;
  }): Promise<{ reflection_id: string; stored: boolean }> {
    return this.post("/api/reflections", body);
  }

  postTelemetry(events: InteractionEventWire[]): Promise<{ accepted: number }> {
    return this.post("/api/telemetry", events);
  }

  postAnswers(surveyId: string, answers: AnswerWire[]): Promise<{ stored: number }> {
    return this.post(`/api/surveys/${surveyId}/answers`, answers);
  }

  reflectionStats(): Promise<{
    by_team: Record<string, Record<string, number>>;
    category_totals: Record<string, number>;
    total: number;
  }> {
    return this.get("/api/reflections/stats");
  }

  heatmap(
    teamId: string,
    cols: number,
    rows: number,
  ): Promise<{ grid: { cols: number; rows: number }; cells: number[][]; total: number }> {
    return this.get(`/api/teams/${teamId}/heatmap?cols=${cols}&rows=${rows}`);
  }
}
