/** Survey forms: one radio row (1..5) per Likert statement, a textarea per
 * free-text question. Submission is blocked with an inline message until
 * every Likert item has an answer. */

import { ApiClient, ApiError } from "./api.js";
import type { AnswerWire, SurveyDef } from "./types.js";

export interface SurveyFormOptions {
  api: ApiClient;
  respondentId: string;
  teamId: string | null;
  onSubmitted?: () => void;
}

const SCALE_HINT = "1 = strongly disagree, 5 = completely agree";

export function renderSurveyForm(
  container: HTMLElement,
  survey: SurveyDef,
  opts: SurveyFormOptions,
): void {
  container.innerHTML = "";
  const form = document.createElement("form");
  form.className = "survey-form";
  form.dataset.surveyId = survey.survey_id;

  const heading = document.createElement("h2");
  heading.textContent = survey.title;
  form.appendChild(heading);

  const hint = document.createElement("p");
  hint.className = "scale-hint";
  hint.textContent = SCALE_HINT;
  form.appendChild(hint);

  for (const item of survey.items) {
    const fieldset = document.createElement("fieldset");
    fieldset.dataset.itemId = item.item_id;

    const legend = document.createElement("legend");
    legend.textContent = `${item.item_id}: ${item.statement}`;
    fieldset.appendChild(legend);

    if (item.kind === "likert5") {
      for (let value = 1; value <= 5; value++) {
        const label = document.createElement("label");
        label.className = "likert-choice";
        const radio = document.createElement("input");
        radio.type = "radio";
        radio.name = item.item_id;
        radio.value = String(value);
        label.appendChild(radio);
        label.appendChild(document.createTextNode(String(value)));
        fieldset.appendChild(label);
      }
    } else {
      const textarea = document.createElement("textarea");
      textarea.name = item.item_id;
      fieldset.appendChild(textarea);
    }

    const itemError = document.createElement("div");
    itemError.className = "item-error";
    itemError.hidden = true;
    fieldset.appendChild(itemError);

    form.appendChild(fieldset);
  }

  const anonymous = document.createElement("label");
  anonymous.className = "anonymous-choice";
  const anonymousBox = document.createElement("input");
  anonymousBox.type = "checkbox";
  anonymousBox.name = "anonymous";
  anonymous.appendChild(anonymousBox);
  anonymous.appendChild(document.createTextNode("Answer anonymously"));
  form.appendChild(anonymous);

  const formError = document.createElement("div");
  formError.className = "form-error";
  formError.hidden = true;
  form.appendChild(formError);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Submit answers";
  form.appendChild(submit);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    formError.hidden = true;
    const answers: AnswerWire[] = [];
    let blocked = false;

    for (const item of survey.items) {
      const fieldset = form.querySelector<HTMLElement>(
        `fieldset[data-item-id="${item.item_id}"]`,
      )!;
      const itemError = fieldset.querySelector<HTMLElement>(".item-error")!;
      itemError.hidden = true;
      if (item.kind === "likert5") {
        const chosen = form.querySelector<HTMLInputElement>(
          `input[name="${item.item_id}"]:checked`,
        );
        if (!chosen) {
          itemError.textContent = "Please answer this statement.";
          itemError.hidden = false;
          blocked = true;
          continue;
        }
        answers.push({ item_id: item.item_id, value: Number(chosen.value) });
      } else {
        const textarea = form.querySelector<HTMLTextAreaElement>(
          `textarea[name="${item.item_id}"]`,
        )!;
        if (textarea.value.trim()) {
          answers.push({ item_id: item.item_id, value: textarea.value.trim() });
        }
      }
    }
    if (blocked) return;

    if (!anonymousBox.checked) {
      for (const answer of answers) {
        answer.respondent_id = opts.respondentId;
        if (opts.teamId) answer.team_id = opts.teamId;
      }
    }
    try {
      await opts.api.postAnswers(survey.survey_id, answers);
      container.innerHTML = "";
      const done = document.createElement("p");
      done.className = "survey-confirmation";
      done.textContent = "Thanks, your answers were recorded.";
      container.appendChild(done);
      opts.onSubmitted?.();
    } catch (err) {
      formError.textContent =
        err instanceof ApiError ? `Not submitted (${err.status}): ${err.detail}` : String(err);
      formError.hidden = false;
    }
  });

  container.appendChild(form);
}
