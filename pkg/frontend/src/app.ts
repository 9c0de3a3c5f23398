/** Page wiring: token login, then scoreboard, personal timeline with
 * telemetry capture, and survey forms. Every number displayed comes from an
 * API response. */

import { ApiClient, ApiError } from "./api.js";
import { renderScoreboard } from "./scoreboard.js";
import { renderSurveyForm } from "./survey.js";
import { TelemetryCapture } from "./telemetry.js";
import { TimelineView } from "./timeline.js";
import type { ExerciseInfo, Identity } from "./types.js";

const SCOREBOARD_POLL_MS = 10_000;

function section(parent: HTMLElement, id: string, title: string): HTMLElement {
  const wrap = document.createElement("section");
  wrap.id = id;
  const h = document.createElement("h2");
  h.textContent = title;
  wrap.appendChild(h);
  const body = document.createElement("div");
  body.className = "body";
  wrap.appendChild(body);
  parent.appendChild(wrap);
  return body;
}

function banner(el: HTMLElement, message: string, retry: () => void): void {
  el.innerHTML = "";
  const div = document.createElement("div");
  div.className = "error-banner";
  div.textContent = message;
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.addEventListener("click", retry);
  div.appendChild(button);
  el.appendChild(div);
}

export async function startApp(
  root: HTMLElement,
  baseUrl: string,
  token: string,
  learnerId: string,
): Promise<void> {
  const api = new ApiClient(baseUrl, token);
  const me = await api.me();
  const identity: Identity = { role: me.role, team_id: me.team_id, learner_id: learnerId };
  const info: ExerciseInfo = await api.exercise();

  root.innerHTML = "";
  const title = document.createElement("h1");
  title.textContent = info.exercise.name;
  root.appendChild(title);

  const scoreboardEl = section(root, "scoreboard", "Scoreboard");
  const loadScoreboard = async () => {
    try {
      renderScoreboard(scoreboardEl, await api.scoreboard());
    } catch (err) {
      banner(scoreboardEl, `Scoreboard unavailable: ${err}`, loadScoreboard);
    }
  };
  await loadScoreboard();
  setInterval(loadScoreboard, SCOREBOARD_POLL_MS);

  if (identity.role === "blue" && identity.team_id) {
    const timelineEl = section(root, "timeline", "Your scoring timeline");
    const loadTimeline = async () => {
      try {
        const model = await api.timeline(identity.team_id!);
        const view = new TimelineView(timelineEl, model, {
          api,
          learnerId: identity.learner_id,
          optionLabels: info.reflection_options,
        });
        view.render();
        const capture = new TelemetryCapture({
          sessionId: `sess-${identity.learner_id}-${Date.now()}`,
          learnerId: identity.learner_id,
          teamId: identity.team_id!,
          post: (events) => api.postTelemetry(events),
        });
        capture.attach(timelineEl);
        capture.start();
        window.addEventListener("beforeunload", () => void capture.stop());
      } catch (err) {
        if (err instanceof ApiError && err.status === 403) {
          banner(timelineEl, "The timeline is not open yet — check back after the break.",
                 loadTimeline);
        } else {
          banner(timelineEl, `Timeline unavailable: ${err}`, loadTimeline);
        }
      }
    };
    await loadTimeline();

    const surveysEl = section(root, "surveys", "Surveys");
    for (const survey of info.surveys) {
      const holder = document.createElement("div");
      surveysEl.appendChild(holder);
      renderSurveyForm(holder, survey, {
        api,
        respondentId: identity.learner_id,
        teamId: identity.team_id,
      });
    }
  }
}

export function mountLogin(root: HTMLElement, baseUrl = ""): void {
  root.innerHTML = "";
  const form = document.createElement("form");
  form.className = "login";
  form.innerHTML = `
    <h1>Exercise portal</h1>
    <label>Access token <input name="token" type="password" required></label>
    <label>Your id <input name="learner" required placeholder="e.g. t1-l2"></label>
    <button type="submit">Enter</button>
    <div class="form-error" hidden></div>
  `;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const token = (form.elements.namedItem("token") as HTMLInputElement).value.trim();
    const learner = (form.elements.namedItem("learner") as HTMLInputElement).value.trim();
    try {
      await startApp(root, baseUrl, token, learner);
    } catch (err) {
      const error = form.querySelector<HTMLElement>(".form-error")!;
      error.textContent = err instanceof ApiError && err.status === 401
        ? "That token was not accepted."
        : `Login failed: ${err}`;
      error.hidden = false;
    }
  });
  root.appendChild(form);
}
