// Typed client for the session service. States travel as
// {sorts, predicates, functions} JSON; successor groups carry a label (the
// exogenous action) and a preview state.

export type Elem = string | number;

export interface StateJson {
  sorts: Record<string, Elem[]>;
  predicates: Record<string, Elem[][]>;
  functions: Record<string, [Elem[], Elem][]>;
}

export interface SuccessorGroup {
  index: number;
  label: string;
  state: StateJson;
}

export interface SuccessorsPayload {
  groups: SuccessorGroup[];
  truncated: boolean;
}

export interface SessionPayload {
  id: string;
  status: string;
  step: number | null;
  state: StateJson | null;
  successors: SuccessorsPayload;
}

export interface CreatePayload {
  id: string;
  status: string;
  candidates: SuccessorGroup[];
  truncated: boolean;
}

export interface HistoryPayload {
  states: StateJson[];
  metadata: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
  }
}

async function parseResponse<T>(res: Response): Promise<T> {
  if (res.status === 204) return undefined as T;
  const body = await res.json().catch(() => null);
  if (!res.ok) throw new ApiError(res.status, body?.detail ?? body);
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(program: string): Promise<CreatePayload> {
    const res = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ program }),
    });
    return parseResponse(res);
  }

  async getSession(id: string): Promise<SessionPayload> {
    return parseResponse(await fetch(this.url(`/sessions/${id}`)));
  }

  async successors(id: string): Promise<SuccessorsPayload> {
    return parseResponse(await fetch(this.url(`/sessions/${id}/successors`)));
  }

  async step(id: string, choice: number): Promise<SessionPayload> {
    const res = await fetch(this.url(`/sessions/${id}/step`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ choice }),
    });
    return parseResponse(res);
  }

  async rollback(id: string, to: number): Promise<SessionPayload> {
    const res = await fetch(this.url(`/sessions/${id}/rollback`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ to }),
    });
    return parseResponse(res);
  }

  async history(id: string): Promise<HistoryPayload> {
    return parseResponse(await fetch(this.url(`/sessions/${id}/history`)));
  }

  async deleteSession(id: string): Promise<void> {
    await parseResponse(await fetch(this.url(`/sessions/${id}`), { method: "DELETE" }));
  }
}
