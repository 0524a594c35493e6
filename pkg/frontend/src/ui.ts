// DOM rendering: lobby, the 5x4 word grid, result and share step,
// questionnaire and feedback forms. Pure functions of the view plus
// callbacks; no scoring logic lives here.

import type { ClientSessionView } from "./state.js";
import { canSubmit, shareCandidates } from "./state.js";

export interface UICallbacks {
  onToggleWord(word: string): void;
  onSubmitSelection(): void;
  onShare(word: string | undefined): void;
  onJoinQueue(alias: string): void;
  onJoinTag(alias: string, tag: string): void;
  onQuestionnaire(kind: "urcs" | "bfi", items: number[]): void;
  onFeedback(ratings: { ui_clarity: number; fairness: number; flow: number },
             comment?: string): void;
  onBackToLobby(): void;
  fetchDefinition(word: string): Promise<string | null>;
}

const GRID_COLUMNS = 4;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderLobby(root: HTMLElement, view: ClientSessionView,
                            cb: UICallbacks): void {
  root.replaceChildren();
  const panel = el("div", { class: "lobby" });
  panel.appendChild(el("h1", {}, "Word Match"));
  if (view.abandonedReason) {
    panel.appendChild(el("p", { class: "notice", id: "abandoned-notice" },
                         `Session ended: ${view.abandonedReason}`));
  }
  const alias = el("input", { id: "alias", placeholder: "display name" });
  alias.value = view.alias;
  const tag = el("input", { id: "tag", placeholder: "shared tag (optional)" });
  const joinQueue = el("button", { id: "join-queue" }, "Find a partner");
  joinQueue.addEventListener("click", () => cb.onJoinQueue(alias.value));
  const joinTag = el("button", { id: "join-tag" }, "Join by tag");
  joinTag.addEventListener("click", () => cb.onJoinTag(alias.value, tag.value));
  panel.append(alias, joinQueue, tag, joinTag);

  const board = el("div", { class: "leaderboard", id: "leaderboard" });
  board.appendChild(el("h2", {}, "Leaderboard"));
  const list = el("ol");
  for (const entry of view.leaderboard) {
    list.appendChild(el("li", {}, `${entry.alias} — ${entry.best_session_total}`));
  }
  board.appendChild(list);
  panel.appendChild(board);
  root.appendChild(panel);
}

export function renderWaiting(root: HTMLElement): void {
  root.replaceChildren(el("p", { id: "waiting" }, "Waiting for a partner..."));
}

export function renderRound(root: HTMLElement, view: ClientSessionView,
                            cb: UICallbacks): void {
  root.replaceChildren();
  const panel = el("div", { class: "round" });
  panel.appendChild(el("h2", { id: "round-header" },
                       `Round ${view.roundNo} of 10 — ${view.theme}`));
  panel.appendChild(el("p", { id: "keyword", class: "keyword" }, view.keyword ?? ""));
  panel.appendChild(el("p", { id: "quota" },
                       `Pick ${view.quota} words (${view.selection.length}/${view.quota})`));
  panel.appendChild(el("p", { id: "score-line" },
                       `Total ${view.total} · Streak ${view.streak}`));

  const matched = new Set(view.lastResult?.matched ?? []);
  const grid = el("table", { id: "grid", class: "grid" });
  for (let row = 0; row < view.matrix.length / GRID_COLUMNS; row += 1) {
    const tr = el("tr");
    for (let col = 0; col < GRID_COLUMNS; col += 1) {
      const word = view.matrix[row * GRID_COLUMNS + col];
      if (word === undefined) continue;
      const td = el("td");
      const classes = ["word"];
      if (view.selection.includes(word)) classes.push("selected");
      if (matched.has(word)) classes.push("matched");
      const button = el("button", { class: classes.join(" "), "data-word": word }, word);
      button.addEventListener("click", () => cb.onToggleWord(word));
      const info = el("span", { class: "info", "data-define": word, title: "definition" }, "ⓘ");
      info.addEventListener("click", async (event) => {
        event.stopPropagation();
        const definition = await cb.fetchDefinition(word);
        info.title = definition ?? "no definition found";
      });
      td.append(button, info);
      tr.appendChild(td);
    }
    grid.appendChild(tr);
  }
  panel.appendChild(grid);

  const submit = el("button", { id: "submit" }, "Submit");
  submit.disabled = !canSubmit(view);
  submit.addEventListener("click", () => cb.onSubmitSelection());
  panel.appendChild(submit);
  if (view.phase === "submitted") {
    panel.appendChild(el("p", { id: "partner-pending" }, "Waiting for your partner..."));
  }
  root.appendChild(panel);
}

export function renderResult(root: HTMLElement, view: ClientSessionView,
                             cb: UICallbacks): void {
  renderRound(root, view, cb); // grid stays visible with matched words highlighted
  const result = view.lastResult;
  if (!result) return;
  const panel = el("div", { class: "result", id: "result" });
  panel.appendChild(el("h3", {}, `Round ${result.round_no} result`));
  panel.appendChild(el("p", { id: "result-line" },
    `Matched ${result.matched.length} — rate ${Math.round(result.wcmr * 100)}% — ` +
    `+${result.points} points` +
    (result.bonus ? ` — streak bonus +${result.bonus}` : "")));
  panel.appendChild(el("p", { id: "result-total" }, `Total ${result.total}`));
  if (view.partnerShared) {
    panel.appendChild(el("p", { id: "partner-shared" },
                         `Partner shared: ${view.partnerShared}`));
  }
  const share = el("div", { id: "share" });
  share.appendChild(el("p", {}, "Share one of your unmatched words:"));
  for (const word of shareCandidates(view)) {
    const button = el("button", { class: "share-word", "data-share": word }, word);
    button.addEventListener("click", () => cb.onShare(word));
    share.appendChild(button);
  }
  const skip = el("button", { id: "skip-share" }, "Skip");
  skip.addEventListener("click", () => cb.onShare(undefined));
  share.appendChild(skip);
  if (view.phase === "shared") {
    share.appendChild(el("p", { id: "share-pending" }, "Waiting for your partner..."));
  }
  panel.appendChild(share);
  root.appendChild(panel);
}

function likertRows(table: HTMLTableElement, name: string, rows: number,
                    points: number): void {
  for (let i = 0; i < rows; i += 1) {
    const tr = el("tr");
    tr.appendChild(el("td", {}, `${i + 1}.`));
    for (let value = 1; value <= points; value += 1) {
      const td = el("td");
      const input = el("input", {
        type: "radio",
        name: `${name}-${i}`,
        value: String(value),
      });
      td.appendChild(input);
      td.appendChild(el("span", {}, String(value)));
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
}

function readLikert(form: HTMLElement, name: string, rows: number): number[] | null {
  const items: number[] = [];
  for (let i = 0; i < rows; i += 1) {
    const checked = form.querySelector<HTMLInputElement>(
      `input[name="${name}-${i}"]:checked`);
    if (!checked) return null;
    items.push(Number(checked.value));
  }
  return items;
}

export function renderCompleted(root: HTMLElement, view: ClientSessionView,
                                cb: UICallbacks): void {
  root.replaceChildren();
  const panel = el("div", { class: "completed", id: "questionnaires" });
  panel.appendChild(el("h2", {}, "Session complete"));
  panel.appendChild(el("p", { id: "final-total" }, `Final score: ${view.finalTotal}`));
  if (view.leaderboardRank !== null) {
    panel.appendChild(el("p", { id: "final-rank" },
                         `Leaderboard rank: ${view.leaderboardRank}`));
  }

  const urcs = el("div", { id: "urcs-form" });
  urcs.appendChild(el("h3", {}, "About you two (1 = strongly disagree, 7 = strongly agree)"));
  const urcsTable = el("table");
  likertRows(urcsTable, "urcs", 12, 7);
  urcs.appendChild(urcsTable);
  const urcsStatus = el("p", { id: "urcs-status" }, "");
  const urcsSend = el("button", { id: "urcs-send" }, "Send pair questionnaire");
  urcsSend.addEventListener("click", () => {
    const items = readLikert(urcs, "urcs", 12);
    if (items === null) {
      urcsStatus.textContent = "Please answer every row.";
      return;
    }
    urcsStatus.textContent = "Sent — thank you!";
    cb.onQuestionnaire("urcs", items);
  });
  urcs.append(urcsSend, urcsStatus);

  const bfi = el("div", { id: "bfi-form" });
  bfi.appendChild(el("h3", {}, "About you (1 = disagree strongly, 5 = agree strongly)"));
  const bfiTable = el("table");
  likertRows(bfiTable, "bfi", 10, 5);
  bfi.appendChild(bfiTable);
  const bfiStatus = el("p", { id: "bfi-status" }, "");
  const bfiSend = el("button", { id: "bfi-send" }, "Send individual questionnaire");
  bfiSend.addEventListener("click", () => {
    const items = readLikert(bfi, "bfi", 10);
    if (items === null) {
      bfiStatus.textContent = "Please answer every row.";
      return;
    }
    bfiStatus.textContent = "Sent — thank you!";
    cb.onQuestionnaire("bfi", items);
  });
  bfi.append(bfiSend, bfiStatus);

  const feedback = el("div", { id: "feedback-form" });
  feedback.appendChild(el("h3", {}, "Quick feedback (optional)"));
  const fbTable = el("table");
  likertRows(fbTable, "fb", 3, 5);
  feedback.appendChild(fbTable);
  const comment = el("textarea", { id: "fb-comment", placeholder: "anything else?" });
  const fbStatus = el("p", { id: "fb-status" }, "");
  const fbSend = el("button", { id: "fb-send" }, "Send feedback");
  fbSend.addEventListener("click", () => {
    const items = readLikert(feedback, "fb", 3);
    if (items === null) {
      fbStatus.textContent = "Please rate all three rows.";
      return;
    }
    fbStatus.textContent = "Sent — thank you!";
    cb.onFeedback({ ui_clarity: items[0], fairness: items[1], flow: items[2] },
                  comment.value || undefined);
  });
  feedback.append(comment, fbSend, fbStatus);

  const back = el("button", { id: "back-to-lobby" }, "Back to lobby");
  back.addEventListener("click", () => cb.onBackToLobby());

  panel.append(urcs, bfi, feedback, back);
  root.appendChild(panel);
}

export function render(root: HTMLElement, view: ClientSessionView, cb: UICallbacks): void {
  switch (view.phase) {
    case "lobby":
      renderLobby(root, view, cb);
      break;
    case "waiting":
      renderWaiting(root);
      break;
    case "selecting":
    case "submitted":
      renderRound(root, view, cb);
      break;
    case "result":
    case "shared":
      renderResult(root, view, cb);
      break;
    case "done":
      renderCompleted(root, view, cb);
      break;
  }
}
