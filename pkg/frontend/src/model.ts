// View model and session controller. The human plays the role of the
// choose() hook: the controller surfaces the grouped successor actions,
// posts the pick, and always re-fetches (no optimistic rendering). Every
// click is recorded so a session can be replayed move for move.

import {
  ApiClient, CreatePayload, SessionPayload, StateJson, SuccessorGroup,
} from "./api.js";

export interface ViewModel {
  sessionId: string | null;
  status: string;            // AwaitingInit | Running | Deadlock | Ended | Error
  banner: string;
  state: StateJson | null;
  previous: StateJson | null;
  actions: SuccessorGroup[];
  truncated: boolean;
  timeline: StateJson[];     // thumbnails 0..k
  pending: boolean;
  error: string | null;
}

export type ClickEvent =
  | { kind: "load"; program: string }
  | { kind: "pick"; label: string }
  | { kind: "rollback"; to: number };

export function emptyModel(): ViewModel {
  return {
    sessionId: null,
    status: "Idle",
    banner: "No session",
    state: null,
    previous: null,
    actions: [],
    truncated: false,
    timeline: [],
    pending: false,
    error: null,
  };
}

export function statusBanner(status: string, actionCount: number): string {
  switch (status) {
    case "AwaitingInit":
      return actionCount
        ? "Pick an initial state"
        : "No initial state satisfies the theory";
    case "Running":
      return "Running";
    case "Deadlock":
      return "Deadlock — roll back to continue";
    case "Ended":
      return "Ended";
    default:
      return status;
  }
}

// -- state diffing -----------------------------------------------------------

export interface StateDiff {
  addedTuples: Record<string, string[]>;    // predicate -> rendered tuples
  removedTuples: Record<string, string[]>;
  changedValues: Record<string, string[]>;  // function -> "args: old -> new"
}

const tupleKey = (t: Array<string | number>) => JSON.stringify(t);

export function diffStates(prev: StateJson | null, next: StateJson): StateDiff {
  const diff: StateDiff = { addedTuples: {}, removedTuples: {}, changedValues: {} };
  if (!prev) return diff;
  for (const [name, tuples] of Object.entries(next.predicates)) {
    const before = new Set((prev.predicates[name] ?? []).map(tupleKey));
    const after = new Set(tuples.map(tupleKey));
    const added = [...after].filter((t) => !before.has(t));
    const removed = [...before].filter((t) => !after.has(t));
    if (added.length) diff.addedTuples[name] = added;
    if (removed.length) diff.removedTuples[name] = removed;
  }
  for (const [name, entries] of Object.entries(next.functions)) {
    const before = new Map(
      (prev.functions[name] ?? []).map(([args, v]) => [tupleKey(args), v]));
    const changes: string[] = [];
    for (const [args, value] of entries) {
      const old = before.get(tupleKey(args));
      if (old !== undefined && old !== value) {
        changes.push(`${name}(${args.join(", ")}): ${old} -> ${value}`);
      }
    }
    if (changes.length) diff.changedValues[name] = changes;
  }
  return diff;
}

// -- controller ---------------------------------------------------------------

export class SessionController {
  model: ViewModel = emptyModel();
  readonly clickLog: ClickEvent[] = [];
  private listeners: Array<(m: ViewModel) => void> = [];

  constructor(private api: ApiClient) {}

  onChange(fn: (m: ViewModel) => void): void {
    this.listeners.push(fn);
  }

  private publish(): void {
    for (const fn of this.listeners) fn(this.model);
  }

  private update(patch: Partial<ViewModel>): void {
    this.model = { ...this.model, ...patch };
    this.publish();
  }

  private applySession(payload: SessionPayload, timeline: StateJson[]): void {
    this.update({
      sessionId: payload.id,
      status: payload.status,
      banner: statusBanner(payload.status, payload.successors.groups.length),
      previous: this.model.state,
      state: payload.state,
      actions: payload.successors.groups,
      truncated: payload.successors.truncated,
      timeline,
      pending: false,
      error: null,
    });
  }

  async loadProgram(program: string): Promise<void> {
    this.clickLog.push({ kind: "load", program });
    this.update({ ...emptyModel(), pending: true });
    try {
      const created: CreatePayload = await this.api.createSession(program);
      this.update({
        sessionId: created.id,
        status: created.status,
        banner: statusBanner(created.status, created.candidates.length),
        state: null,
        previous: null,
        actions: created.candidates,
        truncated: created.truncated,
        timeline: [],
        pending: false,
        error: null,
      });
    } catch (err) {
      this.update({ pending: false, status: "Error", banner: String(err), error: String(err) });
      throw err;
    }
  }

  /** Post the action with the given label (the recorded, replayable key). */
  async pickAction(label: string): Promise<void> {
    const action = this.model.actions.find((g) => g.label === label);
    if (!action) throw new Error(`unknown action label: ${label}`);
    if (this.model.pending || this.model.sessionId === null) return;
    this.clickLog.push({ kind: "pick", label });
    this.update({ pending: true });
    try {
      const payload = await this.api.step(this.model.sessionId, action.index);
      const history = await this.api.history(this.model.sessionId);
      this.applySession(payload, history.states);
    } catch (err) {
      this.update({ pending: false, error: String(err) });
      throw err;
    }
  }

  async rollbackTo(k: number): Promise<void> {
    if (this.model.pending || this.model.sessionId === null) return;
    this.clickLog.push({ kind: "rollback", to: k });
    this.update({ pending: true });
    try {
      const payload = await this.api.rollback(this.model.sessionId, k);
      const history = await this.api.history(this.model.sessionId);
      this.applySession(payload, history.states);
    } catch (err) {
      this.update({ pending: false, error: String(err) });
      throw err;
    }
  }

  /** Re-fetch the session (the 500ms poll; rendering never goes stale). */
  async refresh(): Promise<void> {
    if (this.model.pending || this.model.sessionId === null) return;
    const payload = await this.api.getSession(this.model.sessionId);
    const history = await this.api.history(this.model.sessionId);
    this.applySession(payload, history.states);
  }
}

/** Drive a fresh controller through a recorded click log. */
export async function replayLog(api: ApiClient, log: ClickEvent[]): Promise<SessionController> {
  const controller = new SessionController(api);
  for (const event of log) {
    if (event.kind === "load") await controller.loadProgram(event.program);
    else if (event.kind === "pick") await controller.pickAction(event.label);
    else await controller.rollbackTo(event.to);
  }
  return controller;
}
