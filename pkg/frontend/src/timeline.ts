/** Interactive score timeline: a right-continuous step curve with one
 * colored dot per manually rated event. Hovering a dot shows its tooltip
 * verbatim; clicking opens the reflection dialog (at most one open). */

import { ApiClient, ApiError } from "./api.js";
import type { ReflectionOption, TimelineDot, TimelineModel } from "./types.js";

export const DOT_FILL: Record<string, string> = {
  red: "#d9534f",
  white: "#f8f9fa",
  yellow: "#f0ad4e",
  grey: "#adb5bd",
};
// white dots need a dark border to be visible on a light background
const DOT_STROKE: Record<string, string> = {
  red: "#b52b27",
  white: "#343a40",
  yellow: "#c77c11",
  grey: "#6c757d",
};

const SVG_NS = "http://www.w3.org/2000/svg";

export interface TimelineViewOptions {
  api: ApiClient;
  learnerId: string;
  optionLabels: Record<string, ReflectionOption[]>; // keyed by dot color category id
  width?: number;
  height?: number;
}

interface ViewState {
  hoveredDotId: string | null;
  openDialogDotId: string | null;
}

export class TimelineView {
  readonly state: ViewState = { hoveredDotId: null, openDialogDotId: null };
  /** latest stored choice per dot, updated after successful posts */
  readonly chosenOptions = new Map<string, string>();
  private options: Map<string, ReflectionOption>;

  constructor(
    private container: HTMLElement,
    private model: TimelineModel,
    private opts: TimelineViewOptions,
  ) {
    this.options = new Map();
    for (const list of Object.values(opts.optionLabels)) {
      for (const option of list) this.options.set(option.option_id, option);
    }
  }

  private xScale(width: number): (t: number) => number {
    const { start, end } = this.model.range;
    const span = Math.max(end - start, 1);
    return (t) => 40 + ((t - start) / span) * (width - 60);
  }

  private yScale(height: number): (score: number) => number {
    const scores = this.model.curve.map(([, s]) => s);
    const top = Math.max(...scores);
    const bottom = Math.min(...scores);
    const span = Math.max(top - bottom, 1);
    return (s) => 20 + ((top - s) / span) * (height - 60);
  }

  /** Curve value at a dot's instant: the score right after the event. */
  scoreAt(t: number): number {
    let value = this.model.curve[0][1];
    for (const [time, score] of this.model.curve) {
      if (time > t) break;
      value = score;
    }
    return value;
  }

  render(): void {
    const width = this.opts.width ?? 960;
    const height = this.opts.height ?? 360;
    const x = this.xScale(width);
    const y = this.yScale(height);

    this.container.innerHTML = "";
    this.container.classList.add("timeline");

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));

    // step curve: hold each score until the next breakpoint, then jump
    const [t0, s0] = this.model.curve[0];
    let d = `M ${x(t0)} ${y(s0)}`;
    for (const [t, s] of this.model.curve.slice(1)) {
      d += ` H ${x(t)} V ${y(s)}`;
    }
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", d);
    path.setAttribute("class", "score-curve");
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", "#2b6cb0");
    path.setAttribute("stroke-width", "2");
    svg.appendChild(path);

    for (const dot of this.model.dots) {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("class", `dot dot-${dot.color}`);
      circle.setAttribute("data-event-id", dot.event_id);
      circle.setAttribute("cx", String(x(dot.at)));
      circle.setAttribute("cy", String(y(this.scoreAt(dot.at))));
      circle.setAttribute("r", "6");
      circle.setAttribute("fill", DOT_FILL[dot.color]);
      circle.setAttribute("stroke", DOT_STROKE[dot.color]);
      circle.setAttribute("stroke-width", "1.5");
      circle.addEventListener("mouseenter", () => this.showTooltip(dot, circle));
      circle.addEventListener("mouseleave", () => this.hideTooltip());
      circle.addEventListener("click", () => this.openDialog(dot));
      svg.appendChild(circle);
    }
    this.container.appendChild(svg);

    const tooltip = document.createElement("div");
    tooltip.className = "dot-tooltip";
    tooltip.hidden = true;
    this.container.appendChild(tooltip);
  }

  private tooltipEl(): HTMLElement {
    return this.container.querySelector(".dot-tooltip") as HTMLElement;
  }

  showTooltip(dot: TimelineDot, anchor: Element): void {
    this.state.hoveredDotId = dot.event_id;
    const tooltip = this.tooltipEl();
    tooltip.textContent = dot.tooltip; // verbatim from the model
    if (dot.recorded_late) {
      const note = document.createElement("div");
      note.className = "recorded-late";
      note.textContent = "Recorded later than it happened.";
      tooltip.appendChild(note);
    }
    tooltip.style.left = `${anchor.getAttribute("cx")}px`;
    tooltip.style.top = `${anchor.getAttribute("cy")}px`;
    tooltip.hidden = false;
  }

  hideTooltip(): void {
    this.state.hoveredDotId = null;
    this.tooltipEl().hidden = true;
  }

  openDialog(dot: TimelineDot): void {
    if (this.state.openDialogDotId !== null) return; // at most one dialog
    this.state.openDialogDotId = dot.event_id;

    const backdrop = document.createElement("div");
    backdrop.className = "dialog-backdrop";
    const dialog = document.createElement("div");
    dialog.className = "reflection-dialog";
    dialog.setAttribute("role", "dialog");

    const title = document.createElement("h3");
    title.textContent = dot.title;
    dialog.appendChild(title);

    const form = document.createElement("form");
    const current = this.chosenOptions.get(dot.event_id);
    for (const optionId of dot.reflection_option_ids) {
      const option = this.options.get(optionId);
      const label = document.createElement("label");
      label.className = "option";
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "option";
      radio.value = optionId;
      if (optionId === current) radio.checked = true;
      label.appendChild(radio);
      label.appendChild(document.createTextNode(option ? option.label : optionId));
      form.appendChild(label);
    }

    const freeText = document.createElement("textarea");
    freeText.className = "free-text";
    freeText.placeholder = "Tell us more (optional)";
    form.appendChild(freeText);

    const error = document.createElement("div");
    error.className = "dialog-error";
    error.hidden = true;
    form.appendChild(error);

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Save reflection";
    form.appendChild(submit);

    const cancel = document.createElement("button");
    cancel.type = "button";
    cancel.className = "cancel";
    cancel.textContent = "Cancel";
    cancel.addEventListener("click", () => this.closeDialog());
    form.appendChild(cancel);

    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const chosen = form.querySelector<HTMLInputElement>("input[name=option]:checked");
      if (!chosen) {
        error.textContent = "Pick one of the options first.";
        error.hidden = false;
        return;
      }
      const body: Parameters<ApiClient["postReflection"]>[0] = {
        event_id: dot.event_id,
        learner_id: this.opts.learnerId,
        option_id: chosen.value,
      };
      const text = freeText.value.trim();
      if (text) body.free_text = text;
      try {
        await this.opts.api.postReflection(body);
        this.chosenOptions.set(dot.event_id, chosen.value);
        this.closeDialog();
      } catch (err) {
        // 403/422 (and anything else) surface inline; the dialog stays open
        error.textContent =
          err instanceof ApiError ? `Not saved (${err.status}): ${err.detail}` : String(err);
        error.hidden = false;
      }
    });

    dialog.appendChild(form);
    backdrop.appendChild(dialog);
    this.container.appendChild(backdrop);
  }

  closeDialog(): void {
    this.state.openDialogDotId = null;
    this.container.querySelector(".dialog-backdrop")?.remove();
  }
}
