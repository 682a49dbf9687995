// DOM rendering. Everything here is read-only over the session data; the
// feedback textarea is the single writable control on the page.

import { MarkedLine, diffLines } from "./diff.js";
import { SessionDetail, SessionSummary } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderPendingList(
  doc: Document,
  sessions: SessionSummary[],
  onOpen: (id: string) => void,
): HTMLElement {
  const container = el(doc, "section", "pending-list");
  container.appendChild(el(doc, "h2", undefined, "Sessions awaiting feedback"));
  if (sessions.length === 0) {
    container.appendChild(el(doc, "p", "empty-state", "No sessions awaiting feedback."));
    return container;
  }
  const table = el(doc, "table");
  const head = el(doc, "tr");
  for (const title of ["Task", "Failing stage", "Attempts", ""]) {
    head.appendChild(el(doc, "th", undefined, title));
  }
  table.appendChild(head);
  for (const session of sessions) {
    const row = el(doc, "tr", "session-row");
    row.dataset.sessionId = session.id;
    row.appendChild(el(doc, "td", undefined, session.task_id));
    row.appendChild(el(doc, "td", undefined, session.failing_stage));
    row.appendChild(el(doc, "td", undefined, String(session.attempts)));
    const cell = el(doc, "td");
    const button = el(doc, "button", "open-session", "Review");
    button.addEventListener("click", () => onOpen(session.id));
    cell.appendChild(button);
    row.appendChild(cell);
    table.appendChild(row);
  }
  container.appendChild(table);
  return container;
}

function renderPane(doc: Document, title: string, lines: MarkedLine[]): HTMLElement {
  const pane = el(doc, "div", "template-pane");
  pane.appendChild(el(doc, "h3", undefined, title));
  const pre = el(doc, "pre");
  lines.forEach((line, index) => {
    if (index > 0) pre.appendChild(doc.createTextNode("\n"));
    const span = el(doc, "span", line.kind === "changed" ? "line changed" : "line", line.text);
    pre.appendChild(span);
  });
  pane.appendChild(pre);
  return pane;
}

export interface SessionViewHandlers {
  onSubmit: (id: string, text: string) => void;
  onBack: () => void;
}

export function renderSession(
  doc: Document,
  session: SessionDetail,
  handlers: SessionViewHandlers,
): HTMLElement {
  const container = el(doc, "section", "session-view");

  const header = el(doc, "header");
  const back = el(doc, "button", "back", "← Back to list");
  back.addEventListener("click", handlers.onBack);
  header.appendChild(back);
  header.appendChild(
    el(doc, "h2", undefined, `${session.task_id} — blocked at ${session.failing_stage}`),
  );
  header.appendChild(el(doc, "p", "attempts", `${session.attempts} failed attempts at this stage`));
  container.appendChild(header);

  const violations = el(doc, "div", "violations");
  violations.appendChild(el(doc, "h3", undefined, "Validation errors"));
  const list = el(doc, "ul");
  for (const message of session.violations) {
    list.appendChild(el(doc, "li", undefined, message));
  }
  violations.appendChild(list);
  container.appendChild(violations);

  const transcript = el(doc, "div", "transcript");
  transcript.appendChild(el(doc, "h3", undefined, "Conversation"));
  for (const turn of session.conversation) {
    const turnEl = el(doc, "div", `turn turn-${turn.role}`);
    turnEl.appendChild(el(doc, "span", "role", turn.role));
    turnEl.appendChild(el(doc, "pre", "content", turn.content));
    transcript.appendChild(turnEl);
  }
  container.appendChild(transcript);

  const marked = diffLines(session.current_template, session.reference_template);
  const panes = el(doc, "div", "panes");
  panes.appendChild(renderPane(doc, "Current template", marked.left));
  panes.appendChild(renderPane(doc, "Reference template", marked.right));
  container.appendChild(panes);

  const form = el(doc, "div", "feedback-form");
  form.appendChild(el(doc, "h3", undefined, "Your guidance"));
  const textarea = el(doc, "textarea", "feedback-text");
  textarea.rows = 4;
  const error = el(doc, "p", "form-error");
  const submit = el(doc, "button", "submit-feedback", "Send feedback");
  submit.addEventListener("click", () => {
    if (!textarea.value.trim()) {
      error.textContent = "Feedback text must not be empty.";
      return;
    }
    submit.disabled = true; // one in-flight submit per session
    handlers.onSubmit(session.id, textarea.value);
  });
  form.appendChild(textarea);
  form.appendChild(submit);
  form.appendChild(error);
  container.appendChild(form);

  return container;
}

export function renderConnectionBanner(doc: Document, visible: boolean, detail: string): HTMLElement {
  const banner = el(doc, "div", visible ? "banner banner-visible" : "banner");
  banner.textContent = visible ? `Cannot reach the session server: ${detail}. Retrying…` : "";
  return banner;
}
