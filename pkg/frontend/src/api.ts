// Typed client for the session/run API. The fetch implementation is
// injectable so tests can point it at a stub server (or fake it entirely).

export interface SessionSummary {
  id: string;
  task_id: string;
  failing_stage: string;
  attempts: number;
}

export interface ChatTurn {
  role: string;
  content: string;
}

export interface SessionDetail extends SessionSummary {
  violations: string[];
  conversation: ChatTurn[];
  current_template: string;
  reference_template: string;
  resolved: boolean;
}

export interface RunSummary {
  task_id: string;
  final_status: string;
  success_iteration: number | null;
  iterations: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function readErrorBody(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body?.error === "string" ? body.error : JSON.stringify(body);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new ApiError(await readErrorBody(response), response.status);
    }
    return (await response.json()) as T;
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.getJson<SessionSummary[]>("/sessions");
  }

  getSession(id: string): Promise<SessionDetail> {
    return this.getJson<SessionDetail>(`/sessions/${id}`);
  }

  listRuns(): Promise<RunSummary[]> {
    return this.getJson<RunSummary[]>("/runs");
  }

  // The text travels verbatim; only trailing newlines are normalized away.
  async submitFeedback(id: string, text: string): Promise<void> {
    const normalized = text.replace(/\n+$/, "");
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${id}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text: normalized }),
    });
    if (!response.ok) {
      throw new ApiError(await readErrorBody(response), response.status);
    }
  }
}
