import { afterEach, describe, expect, it, vi } from "vitest";

import { TelemetryCapture } from "../src/telemetry.js";
import type { InteractionEventWire } from "../src/types.js";

function makeCapture(overrides: Partial<ConstructorParameters<typeof TelemetryCapture>[0]> = {}) {
  let clock = 0;
  const posts: InteractionEventWire[][] = [];
  const capture = new TelemetryCapture({
    sessionId: "s1",
    learnerId: "l1",
    teamId: "T1",
    post: async (events) => {
      posts.push(events);
    },
    now: () => clock,
    viewport: () => ({ width: 1000, height: 800 }),
    ...overrides,
  });
  return { capture, posts, tick: (ms: number) => (clock += ms), setClock: (v: number) => (clock = v) };
}

afterEach(() => {
  vi.useRealTimers();
});

describe("sampling", () => {
  it("caps mouse moves at the declared rate under a high-frequency pointer", () => {
    const { capture, tick } = makeCapture();
    // 200 raw move events over one simulated second (5 ms apart)
    for (let i = 0; i < 200; i++) {
      capture.record("move", i % 1000, 10);
      tick(5);
    }
    expect(capture.pending).toBeLessThanOrEqual(20);
    expect(capture.pending).toBe(20); // exactly one per 50 ms window
  });

  it("never throttles clicks and hovers", () => {
    const { capture } = makeCapture();
    for (let i = 0; i < 30; i++) capture.record("click", 1, 1, "a01-t1");
    for (let i = 0; i < 30; i++) capture.record("hover", 2, 2, "a01-t1");
    expect(capture.pending).toBe(60);
  });

  it("clamps coordinates into the viewport and stamps identity", () => {
    const { capture } = makeCapture();
    capture.record("click", 5000, -40, "dot-1");
    capture.record("move", 12.7, 3.2);
    const events = (capture as unknown as { buffer: InteractionEventWire[] }).buffer;
    expect(events[0]).toMatchObject({
      session_id: "s1", learner_id: "l1", team_id: "T1",
      kind: "click", x: 999, y: 0, target: "dot-1",
      viewport: { width: 1000, height: 800 },
    });
    expect(events[1]).toMatchObject({ kind: "move", x: 12, y: 3 });
  });
});

describe("batching", () => {
  it("flushes when the batch threshold fills", async () => {
    const { capture, posts } = makeCapture({ batchThreshold: 100 });
    for (let i = 0; i < 99; i++) capture.record("click", 1, 1);
    expect(posts.length).toBe(0);
    capture.record("click", 2, 2);
    await vi.waitFor(() => expect(posts.length).toBe(1));
    expect(posts[0].length).toBe(100);
    expect(capture.pending).toBe(0);
  });

  it("flushes on the timer interval", async () => {
    vi.useFakeTimers();
    const { capture, posts } = makeCapture({ flushIntervalMs: 5000 });
    capture.start();
    capture.record("click", 1, 1);
    await vi.advanceTimersByTimeAsync(5100);
    expect(posts.length).toBe(1);
    capture.record("click", 2, 2);
    await vi.advanceTimersByTimeAsync(5100);
    expect(posts.length).toBe(2);
    await capture.stop();
  });

  it("drops the oldest events beyond the buffer bound", () => {
    const { capture, tick } = makeCapture({ maxBuffer: 50 });
    for (let i = 0; i < 60; i++) {
      capture.record("click", 1, 1, `dot-${i}`);
      tick(1);
    }
    expect(capture.pending).toBe(50);
    expect(capture.eventsDropped).toBe(10);
    const events = (capture as unknown as { buffer: InteractionEventWire[] }).buffer;
    expect(events[0].target).toBe("dot-10"); // 0..9 were dropped
  });

  it("retries a failed post with backoff and loses nothing", async () => {
    vi.useFakeTimers();
    let failures = 2;
    const posts: InteractionEventWire[][] = [];
    const { capture } = makeCapture({
      backoffBaseMs: 1000,
      post: async (events) => {
        if (failures > 0) {
          failures -= 1;
          throw new Error("connection refused");
        }
        posts.push(events);
      },
    });
    for (let i = 0; i < 5; i++) capture.record("click", i, i);
    await capture.flush(); // first attempt fails, schedules retry in 1 s
    expect(posts.length).toBe(0);
    expect(capture.pending).toBe(5);
    await vi.advanceTimersByTimeAsync(1000); // second attempt fails, retry in 2 s
    expect(posts.length).toBe(0);
    await vi.advanceTimersByTimeAsync(1999);
    expect(posts.length).toBe(0); // backoff not elapsed yet
    await vi.advanceTimersByTimeAsync(1);
    expect(posts.length).toBe(1);
    expect(posts[0].length).toBe(5);
    expect(capture.pending).toBe(0);
    await capture.stop();
  });

  it("keeps at most one post in flight", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const { capture } = makeCapture({
      post: async () => {
        inFlight += 1;
        maxInFlight = Math.max(maxInFlight, inFlight);
        await new Promise((resolve) => setTimeout(resolve, 5));
        inFlight -= 1;
      },
    });
    capture.record("click", 1, 1);
    const first = capture.flush();
    capture.record("click", 2, 2);
    const second = capture.flush(); // no-op while the first is in flight
    await Promise.all([first, second]);
    await capture.flush();
    expect(maxInFlight).toBe(1);
  });
});

describe("DOM capture", () => {
  it("records clicks and dot hovers with targets from the DOM", () => {
    const { capture } = makeCapture();
    const container = document.createElement("div");
    const dot = document.createElement("span");
    dot.setAttribute("data-event-id", "a03-t1");
    container.appendChild(dot);
    document.body.appendChild(container);
    capture.attach(container);

    dot.dispatchEvent(new MouseEvent("click", { bubbles: true, clientX: 10, clientY: 20 }));
    dot.dispatchEvent(new MouseEvent("mouseover", { bubbles: true, clientX: 10, clientY: 20 }));
    container.dispatchEvent(new MouseEvent("mousemove", { bubbles: true, clientX: 1, clientY: 2 }));
    // mouseover on a non-dot is not a hover event
    container.dispatchEvent(new MouseEvent("mouseover", { bubbles: true, clientX: 3, clientY: 4 }));

    const events = (capture as unknown as { buffer: InteractionEventWire[] }).buffer;
    expect(events.map((e) => e.kind)).toEqual(["click", "hover", "move"]);
    expect(events[0].target).toBe("a03-t1");
    expect(events[1].target).toBe("a03-t1");
  });
});
