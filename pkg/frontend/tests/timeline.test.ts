import { beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api.js";
import { ApiError } from "../src/api.js";
import { DOT_FILL, TimelineView } from "../src/timeline.js";
import type { ReflectionOption, TimelineModel } from "../src/types.js";

const OPTIONS: Record<string, ReflectionOption[]> = {
  attacks: [
    { option_id: "attack-recognized", label: "We recognized this attack", free_text: false },
    { option_id: "attack-not-recognized", label: "We did not recognize this attack", free_text: false },
    { option_id: "attack-other", label: "Other / no comment", free_text: true },
  ],
  users: [
    { option_id: "user-handled", label: "We handled the user request", free_text: false },
    { option_id: "user-other", label: "Other / no comment", free_text: true },
  ],
};

const MODEL: TimelineModel = {
  team_id: "T1",
  range: { start: 1000, end: 2000 },
  curve: [
    [1000, 100_000],
    [1200, 99_000],
    [1500, 98_500],
    [1800, 98_900],
    [2000, 98_900],
  ],
  dots: [
    { event_id: "a01-t1", at: 1200, points: -1000, color: "red", title: "Attack one",
      tooltip: "Attack one (-1,000 pts, Attacks)\nFirst attack.", recorded_late: false,
      reflection_option_ids: ["attack-recognized", "attack-not-recognized", "attack-other"] },
    { event_id: "u01-t1", at: 1500, points: -500, color: "yellow", title: "User request",
      tooltip: "User request (-500 pts, Users)", recorded_late: true,
      reflection_option_ids: ["user-handled", "user-other"] },
    { event_id: "c01-t1", at: 1800, points: 400, color: "white", title: "Inject",
      tooltip: "Inject (+400 pts, Injects)", recorded_late: false,
      reflection_option_ids: [] },
  ],
};

function makeView(postReflection = vi.fn().mockResolvedValue({ stored: true })) {
  const container = document.createElement("div");
  document.body.appendChild(container);
  const api = { postReflection } as unknown as ApiClient;
  const view = new TimelineView(container, MODEL, {
    api,
    learnerId: "t1-l1",
    optionLabels: OPTIONS,
  });
  view.render();
  return { container, view, postReflection };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("timeline rendering", () => {
  it("renders one dot element per model dot with the mapped color", () => {
    const { container } = makeView();
    const dots = [...container.querySelectorAll("circle.dot")];
    expect(dots.length).toBe(MODEL.dots.length);
    expect(dots.map((d) => d.getAttribute("fill"))).toEqual([
      DOT_FILL.red, DOT_FILL.yellow, DOT_FILL.white,
    ]);
    expect(container.querySelector(".dot-red")).not.toBeNull();
  });

  it("draws the step curve through every breakpoint", () => {
    const { container } = makeView();
    const d = container.querySelector("path.score-curve")!.getAttribute("d")!;
    // one H/V pair per breakpoint after the first: right-continuous steps
    expect(d.match(/H /g)!.length).toBe(MODEL.curve.length - 1);
    expect(d.match(/V /g)!.length).toBe(MODEL.curve.length - 1);
    expect(d.startsWith("M ")).toBe(true);
  });

  it("places each dot on the curve at the post-event score", () => {
    const { container, view } = makeView();
    const dot = container.querySelector('circle[data-event-id="a01-t1"]')!;
    expect(view.scoreAt(1200)).toBe(99_000);
    // same y as a hypothetical curve point at that score
    const yAttr = Number(dot.getAttribute("cy"));
    const scores = MODEL.curve.map(([, s]) => s);
    const top = Math.max(...scores);
    const bottom = Math.min(...scores);
    const expectedY = 20 + ((top - 99_000) / (top - bottom)) * (360 - 60);
    expect(yAttr).toBeCloseTo(expectedY, 6);
  });

  it("shows the model tooltip verbatim on hover and clears on leave", () => {
    const { container, view } = makeView();
    const dot = container.querySelector('circle[data-event-id="a01-t1"]')!;
    dot.dispatchEvent(new MouseEvent("mouseenter"));
    const tooltip = container.querySelector(".dot-tooltip") as HTMLElement;
    expect(tooltip.hidden).toBe(false);
    expect(tooltip.textContent).toContain("Attack one (-1,000 pts, Attacks)\nFirst attack.");
    expect(view.state.hoveredDotId).toBe("a01-t1");
    dot.dispatchEvent(new MouseEvent("mouseleave"));
    expect(tooltip.hidden).toBe(true);
    expect(view.state.hoveredDotId).toBeNull();
  });

  it("marks late-recorded dots in the tooltip", () => {
    const { container } = makeView();
    const dot = container.querySelector('circle[data-event-id="u01-t1"]')!;
    dot.dispatchEvent(new MouseEvent("mouseenter"));
    expect(container.querySelector(".recorded-late")).not.toBeNull();
  });
});

describe("reflection dialog", () => {
  it("opens on click, lists the dot's options, posts the chosen one", async () => {
    const { container, view, postReflection } = makeView();
    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    expect(view.state.openDialogDotId).toBe("a01-t1");

    const labels = [...container.querySelectorAll(".reflection-dialog label.option")]
      .map((l) => l.textContent);
    expect(labels).toEqual([
      "We recognized this attack",
      "We did not recognize this attack",
      "Other / no comment",
    ]);

    const radio = container.querySelector<HTMLInputElement>(
      'input[value="attack-recognized"]',
    )!;
    radio.checked = true;
    container.querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await vi.waitFor(() => expect(postReflection).toHaveBeenCalledOnce());
    expect(postReflection).toHaveBeenCalledWith({
      event_id: "a01-t1",
      learner_id: "t1-l1",
      option_id: "attack-recognized",
    });
    await vi.waitFor(() => expect(view.state.openDialogDotId).toBeNull());
    expect(view.chosenOptions.get("a01-t1")).toBe("attack-recognized");
  });

  it("cancel closes without any request", () => {
    const { container, view, postReflection } = makeView();
    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    (container.querySelector("button.cancel") as HTMLButtonElement).click();
    expect(postReflection).not.toHaveBeenCalled();
    expect(view.state.openDialogDotId).toBeNull();
    expect(container.querySelector(".dialog-backdrop")).toBeNull();
  });

  it("surfaces API failures inline and keeps the dialog open", async () => {
    const failing = vi.fn().mockRejectedValue(new ApiError(403, "not your dot"));
    const { container, view } = makeView(failing);
    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    const radio = container.querySelector<HTMLInputElement>(
      'input[value="attack-other"]',
    )!;
    radio.checked = true;
    container.querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await vi.waitFor(() => {
      const error = container.querySelector(".dialog-error") as HTMLElement;
      expect(error.hidden).toBe(false);
      expect(error.textContent).toContain("403");
    });
    expect(view.state.openDialogDotId).toBe("a01-t1");
    expect(container.querySelector(".reflection-dialog")).not.toBeNull();
  });

  it("allows at most one open dialog", () => {
    const { container, view } = makeView();
    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    container.querySelector('circle[data-event-id="u01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    expect(container.querySelectorAll(".reflection-dialog").length).toBe(1);
    expect(view.state.openDialogDotId).toBe("a01-t1");
  });

  it("re-opening shows the previously stored choice", async () => {
    const { container, view } = makeView();
    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    const radio = container.querySelector<HTMLInputElement>(
      'input[value="attack-not-recognized"]',
    )!;
    radio.checked = true;
    container.querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await vi.waitFor(() => expect(view.state.openDialogDotId).toBeNull());

    container.querySelector('circle[data-event-id="a01-t1"]')!
      .dispatchEvent(new MouseEvent("click"));
    const checked = container.querySelector<HTMLInputElement>("input[name=option]:checked");
    expect(checked?.value).toBe("attack-not-recognized");
  });
});
