/** Scoreboard table. Values and row order come straight from the API
 * response; the client does no score arithmetic of its own. */

import type { Scoreboard } from "./types.js";

export const SCOREBOARD_COLUMNS = ["services", "attacks", "injects", "users", "access"];

const HEADERS = ["Team", "Services", "Attacks", "Injects", "Users", "Access", "Total"];

export function formatPoints(value: number): string {
  const sign = value < 0 ? "-" : "";
  const digits = Math.abs(value).toString();
  const grouped = digits.replace(/\B(?=(\d{3})+(?!\d))/g, ",");
  return sign + grouped;
}

export function renderScoreboard(container: HTMLElement, board: Scoreboard): void {
  container.innerHTML = "";
  const table = document.createElement("table");
  table.className = "scoreboard";

  const thead = document.createElement("thead");
  const headRow = document.createElement("tr");
  for (const header of HEADERS) {
    const th = document.createElement("th");
    th.textContent = header;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = document.createElement("tbody");
  for (const row of board.rows) {
    const tr = document.createElement("tr");
    tr.dataset.teamId = row.team_id;

    const name = document.createElement("td");
    name.className = "team-name";
    name.textContent = row.display_name;
    tr.appendChild(name);

    for (const column of SCOREBOARD_COLUMNS) {
      const td = document.createElement("td");
      const value = row.totals[column] ?? 0;
      td.className = "points";
      td.dataset.value = String(value);
      td.textContent = formatPoints(value);
      tr.appendChild(td);
    }

    const total = document.createElement("td");
    total.className = "points total";
    total.dataset.value = String(row.total);
    total.textContent = formatPoints(row.total);
    tr.appendChild(total);

    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  container.appendChild(table);
}
