/** End-to-end against the real service running on the bundled fixture data:
 * the scoreboard page must equal the reference table cell for cell, clicking
 * a red dot and picking the "recognized" option must store a reflection
 * retrievable via the stats endpoint, and a scripted 10-second pointer
 * session must produce at least two telemetry batches whose heatmap
 * satisfies conservation. */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, copyFileSync, mkdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderScoreboard } from "../src/scoreboard.js";
import { TelemetryCapture } from "../src/telemetry.js";
import { TimelineView } from "../src/timeline.js";

const PORT = 8893;
const BASE = `http://127.0.0.1:${PORT}`;

const EXPECTED_CELLS: Record<string, number[]> = {
  // services, attacks, injects, users, access, total
  T1: [91_843, -8_500, 9_000, -1_100, 0, 91_243],
  T5: [92_230, -5_000, 3_600, -400, 0, 90_430],
  T2: [81_280, -10_750, 6_425, -4_000, 0, 72_955],
  T4: [74_518, -11_000, 6_650, 0, -4_000, 66_168],
  T3: [85_756, -12_000, 2_475, -1_700, -9_500, 65_031],
};
const EXPECTED_ORDER = ["T1", "T5", "T2", "T4", "T3"];

let server: ChildProcess;

beforeAll(async () => {
  const workDir = mkdtempSync(join(tmpdir(), "cdx-e2e-"));
  const fixtures = join(workDir, "fixtures");
  execFileSync("python3", ["-m", "cdxscore.cli", "export-fixtures", "--dir", fixtures]);
  const dataDir = join(workDir, "data");
  mkdirSync(dataDir);
  copyFileSync(join(fixtures, "service_log.ndjson"), join(dataDir, "events.ndjson"));

  server = spawn(
    "python3",
    ["-m", "cdxscore.cli", "serve",
     "--config", join(fixtures, "demo_config.json"),
     "--data", dataDir, "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await vi.waitFor(
    async () => {
      const response = await fetch(`${BASE}/api/scoreboard`);
      expect(response.ok).toBe(true);
    },
    { timeout: 20_000, interval: 250 },
  );
});

afterAll(() => {
  server?.kill();
});

describe("end to end on fixture data", () => {
  it("renders the scoreboard page equal to the reference table, cell for cell", async () => {
    const api = new ApiClient(BASE);
    const board = await api.scoreboard();
    const container = document.createElement("div");
    document.body.appendChild(container);
    renderScoreboard(container, board);

    const rows = [...container.querySelectorAll("tbody tr")];
    expect(rows.map((r) => r.getAttribute("data-team-id"))).toEqual(EXPECTED_ORDER);
    for (const row of rows) {
      const team = row.getAttribute("data-team-id")!;
      const values = [...row.querySelectorAll("td.points")].map((td) =>
        Number((td as HTMLElement).dataset.value),
      );
      expect(values, team).toEqual(EXPECTED_CELLS[team]);
    }
  });

  it("stores a reflection via the red-dot dialog, retrievable from the stats endpoint", async () => {
    const blue = new ApiClient(BASE, "tok-blue-t3");
    const organizer = new ApiClient(BASE, "tok-organizer");

    const before = await organizer.reflectionStats();
    const baseline = before.by_team["T3"]["attacks"];

    const model = await blue.timeline("T3");
    const info = await blue.exercise();
    const container = document.createElement("div");
    document.body.appendChild(container);
    const view = new TimelineView(container, model, {
      api: blue,
      learnerId: "e2e-learner",
      optionLabels: info.reflection_options,
    });
    view.render();

    const redDot = container.querySelector("circle.dot-red")!;
    const dotId = redDot.getAttribute("data-event-id")!;
    redDot.dispatchEvent(new MouseEvent("click"));
    const recognized = container.querySelector<HTMLInputElement>(
      'input[value="attack-recognized"]',
    )!;
    recognized.checked = true;
    container.querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await vi.waitFor(() =>
      expect(view.chosenOptions.get(dotId)).toBe("attack-recognized"),
    );

    const after = await organizer.reflectionStats();
    expect(after.by_team["T3"]["attacks"]).toBe(baseline + 1);
  });

  it("a scripted 10 s pointer session posts >= 2 batches and the heatmap conserves events", async () => {
    const blue = new ApiClient(BASE, "tok-blue-t2");
    const organizer = new ApiClient(BASE, "tok-organizer");

    const heatmapBefore = await organizer.heatmap("T2", 64, 36);
    const sumBefore = heatmapBefore.cells.flat().reduce((a, b) => a + b, 0);

    let posts = 0;
    const capture = new TelemetryCapture({
      sessionId: `e2e-sess-${Date.now()}`,
      learnerId: "e2e-learner",
      teamId: "T2",
      flushIntervalMs: 4000, // within the <= 5 s contract
      post: async (events) => {
        await blue.postTelemetry(events);
        posts += 1;
      },
      viewport: () => ({ width: 1280, height: 720 }),
    });
    const surface = document.createElement("div");
    document.body.appendChild(surface);
    capture.attach(surface);
    capture.start();

    // drive the pointer for ten real seconds
    const started = Date.now();
    let step = 0;
    while (Date.now() - started < 10_000) {
      surface.dispatchEvent(new MouseEvent("mousemove", {
        bubbles: true,
        clientX: (step * 13) % 1280,
        clientY: (step * 7) % 720,
      }));
      if (step % 40 === 0) {
        surface.dispatchEvent(new MouseEvent("click", {
          bubbles: true, clientX: 100, clientY: 100,
        }));
      }
      step += 1;
      await new Promise((resolve) => setTimeout(resolve, 20));
    }
    await capture.stop();

    expect(posts).toBeGreaterThanOrEqual(2);
    expect(capture.eventsSent).toBeGreaterThan(0);

    const heatmapAfter = await organizer.heatmap("T2", 64, 36);
    const sumAfter = heatmapAfter.cells.flat().reduce((a, b) => a + b, 0);
    expect(sumAfter).toBe(sumBefore + capture.eventsSent);
    expect(heatmapAfter.cells.length).toBe(36);
    expect(heatmapAfter.cells[0].length).toBe(64);
  }, 40_000);
});
