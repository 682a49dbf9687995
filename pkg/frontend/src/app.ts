// Page wiring: poll the pending list, open a session, submit feedback.
// The API base defaults to the serving origin and can be overridden with
// ?api=http://host:port for consoles hosted separately from the server.

import { ApiClient, ApiError } from "./api.js";
import { renderConnectionBanner, renderPendingList, renderSession } from "./views.js";

const POLL_INTERVAL_MS = 2000;

interface AppState {
  view: "list" | "session";
  sessionId: string | null;
  connectionError: string | null;
}

export function createApp(doc: Document, api: ApiClient, pollIntervalMs = POLL_INTERVAL_MS) {
  const root = doc.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const state: AppState = { view: "list", sessionId: null, connectionError: null };
  let timer: ReturnType<typeof setInterval> | null = null;

  async function refresh(): Promise<void> {
    try {
      if (state.view === "list") {
        const sessions = await api.listSessions();
        state.connectionError = null;
        draw(renderPendingList(doc, sessions, openSession));
      } else if (state.sessionId) {
        const session = await api.getSession(state.sessionId);
        state.connectionError = null;
        if (session.resolved) {
          backToList();
          return;
        }
        draw(renderSession(doc, session, { onSubmit: submit, onBack: backToList }));
      }
    } catch (err) {
      state.connectionError = err instanceof Error ? err.message : String(err);
      drawBannerOnly();
    }
  }

  function draw(content: HTMLElement): void {
    root!.replaceChildren(
      renderConnectionBanner(doc, state.connectionError !== null, state.connectionError ?? ""),
      content,
    );
  }

  function drawBannerOnly(): void {
    const banner = renderConnectionBanner(doc, true, state.connectionError ?? "");
    const existing = root!.querySelector(".banner");
    if (existing) {
      existing.replaceWith(banner);
    } else {
      root!.prepend(banner);
    }
  }

  function openSession(id: string): void {
    state.view = "session";
    state.sessionId = id;
    void refresh();
  }

  function backToList(): void {
    state.view = "list";
    state.sessionId = null;
    void refresh();
  }

  async function submit(id: string, text: string): Promise<void> {
    try {
      await api.submitFeedback(id, text);
      backToList();
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      const error = root!.querySelector(".form-error");
      if (error) error.textContent = message;
      const button = root!.querySelector<HTMLButtonElement>(".submit-feedback");
      if (button) button.disabled = false;
    }
  }

  return {
    start(): void {
      void refresh();
      timer = setInterval(() => {
        if (state.view === "list") void refresh();
      }, pollIntervalMs);
    },
    stop(): void {
      if (timer !== null) clearInterval(timer);
    },
    refresh,
  };
}

export function apiBaseFromLocation(loc: Location): string {
  const override = new URLSearchParams(loc.search).get("api");
  return override ?? loc.origin;
}

// Browser entry point; tests build the app with their own document/client.
declare const window: (Window & typeof globalThis) | undefined;
if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("app")) {
  const api = new ApiClient(apiBaseFromLocation(window.location));
  createApp(document, api).start();
}
