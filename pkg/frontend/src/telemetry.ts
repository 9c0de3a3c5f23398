/** In-browser interaction capture.
 *
 * Mouse movements are sampled at a capped rate (default 20 events/s);
 * clicks and dot hovers are always recorded with their dot target. Events
 * buffer locally and are posted in batches, at a bounded interval or as
 * soon as the batch threshold fills. At most one post is in flight; a
 * failed post goes back to the front of the buffer and is retried with
 * exponential backoff. The buffer itself is bounded — beyond the cap the
 * oldest events are dropped.
 */

import type { InteractionEventWire, InteractionKind } from "./types.js";

export interface TelemetryOptions {
  sessionId: string;
  learnerId: string;
  teamId: string;
  post: (events: InteractionEventWire[]) => Promise<unknown>;
  flushIntervalMs?: number; // <= 5s per contract
  batchThreshold?: number;
  maxBuffer?: number;
  moveMinIntervalMs?: number; // 50ms => 20 events/s cap
  backoffBaseMs?: number;
  backoffMaxMs?: number;
  now?: () => number;
  viewport?: () => { width: number; height: number };
}

export class TelemetryCapture {
  private buffer: InteractionEventWire[] = [];
  private lastMoveAt = -Infinity;
  private timer: ReturnType<typeof setInterval> | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private backoffMs: number;
  private detach: (() => void) | null = null;

  postsSent = 0;
  eventsSent = 0;
  eventsDropped = 0;

  constructor(private opts: TelemetryOptions) {
    this.backoffMs = 0;
  }

  private now(): number {
    return this.opts.now ? this.opts.now() : Date.now();
  }

  private viewport(): { width: number; height: number } {
    if (this.opts.viewport) return this.opts.viewport();
    return { width: window.innerWidth, height: window.innerHeight };
  }

  get pending(): number {
    return this.buffer.length;
  }

  get flushIntervalMs(): number {
    return this.opts.flushIntervalMs ?? 5000;
  }

  get moveMinIntervalMs(): number {
    return this.opts.moveMinIntervalMs ?? 50;
  }

  record(kind: InteractionKind, clientX: number, clientY: number, target?: string): void {
    const at = this.now();
    if (kind === "move") {
      if (at - this.lastMoveAt < this.moveMinIntervalMs) return; // rate cap
      this.lastMoveAt = at;
    }
    const { width, height } = this.viewport();
    const event: InteractionEventWire = {
      session_id: this.opts.sessionId,
      learner_id: this.opts.learnerId,
      team_id: this.opts.teamId,
      kind,
      x: Math.min(Math.max(Math.floor(clientX), 0), width - 1),
      y: Math.min(Math.max(Math.floor(clientY), 0), height - 1),
      viewport: { width, height },
      at,
    };
    if (target) event.target = target;

    const maxBuffer = this.opts.maxBuffer ?? 5000;
    while (this.buffer.length >= maxBuffer) {
      this.buffer.shift(); // oldest go first
      this.eventsDropped += 1;
    }
    this.buffer.push(event);
    if (this.buffer.length >= (this.opts.batchThreshold ?? 100)) {
      void this.flush();
    }
  }

  attach(el: HTMLElement | Document): void {
    const dotTarget = (e: Event): string | undefined => {
      const node = e.target as Element | null;
      return node?.closest?.("[data-event-id]")?.getAttribute("data-event-id") ?? undefined;
    };
    const onMove = (e: Event) => {
      const m = e as MouseEvent;
      this.record("move", m.clientX, m.clientY);
    };
    const onClick = (e: Event) => {
      const m = e as MouseEvent;
      this.record("click", m.clientX, m.clientY, dotTarget(e));
    };
    const onOver = (e: Event) => {
      const target = dotTarget(e);
      if (!target) return; // only dot hovers are interesting as hover events
      const m = e as MouseEvent;
      this.record("hover", m.clientX, m.clientY, target);
    };
    el.addEventListener("mousemove", onMove);
    el.addEventListener("click", onClick);
    el.addEventListener("mouseover", onOver);
    this.detach = () => {
      el.removeEventListener("mousemove", onMove);
      el.removeEventListener("click", onClick);
      el.removeEventListener("mouseover", onOver);
    };
  }

  start(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => void this.flush(), this.flushIntervalMs);
    }
  }

  async stop(): Promise<void> {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    this.detach?.();
    this.detach = null;
    await this.flush();
  }

  async flush(): Promise<void> {
    if (this.inFlight || this.buffer.length === 0) return;
    const batch = this.buffer;
    this.buffer = [];
    this.inFlight = true;
    try {
      await this.opts.post(batch);
      this.postsSent += 1;
      this.eventsSent += batch.length;
      this.backoffMs = 0;
    } catch {
      // put the batch back in front and retry later, backing off
      this.buffer = batch.concat(this.buffer);
      const base = this.opts.backoffBaseMs ?? 1000;
      const max = this.opts.backoffMaxMs ?? 30_000;
      this.backoffMs = Math.min(this.backoffMs === 0 ? base : this.backoffMs * 2, max);
      if (this.retryTimer === null) {
        this.retryTimer = setTimeout(() => {
          this.retryTimer = null;
          void this.flush();
        }, this.backoffMs);
      }
    } finally {
      this.inFlight = false;
    }
  }
}
