// Browser wiring: one session at a time, at most one in-flight mutation
// (buttons disable while pending), 500ms polling, rollback via the timeline.

import { ApiClient } from "./api.js";
import { SessionController, diffStates, ViewModel } from "./model.js";
import { renderActions, renderState, renderTimeline } from "./render.js";

const POLL_MS = 500;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function mount(): void {
  const api = new ApiClient("");
  const controller = new SessionController(api);

  const programBox = el<HTMLTextAreaElement>("program");
  const loadButton = el<HTMLButtonElement>("load");
  const banner = el<HTMLElement>("banner");
  const stateView = el<HTMLElement>("state");
  const actionsView = el<HTMLElement>("actions");
  const timelineView = el<HTMLElement>("timeline");

  function render(model: ViewModel): void {
    banner.textContent = model.banner;
    banner.className = `banner banner-${model.status.toLowerCase()}`;
    loadButton.disabled = model.pending;
    if (model.state) {
      stateView.innerHTML = renderState(model.state, diffStates(model.previous, model.state));
    } else {
      stateView.innerHTML = "<em>no state yet</em>";
    }
    actionsView.innerHTML = renderActions(model.actions.map((g) => g.label), model.pending);
    timelineView.innerHTML = renderTimeline(model.timeline.length, model.timeline.length - 1);
  }

  controller.onChange(render);

  loadButton.addEventListener("click", () => {
    controller.loadProgram(programBox.value).catch(() => undefined);
  });

  actionsView.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const choice = target.getAttribute("data-choice");
    if (choice !== null) {
      const label = controller.model.actions[Number(choice)]?.label;
      if (label !== undefined) controller.pickAction(label).catch(() => undefined);
    }
  });

  timelineView.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const to = target.getAttribute("data-rollback");
    if (to !== null) controller.rollbackTo(Number(to)).catch(() => undefined);
  });

  window.setInterval(() => {
    controller.refresh().catch(() => undefined);
  }, POLL_MS);

  render(controller.model);
}

if (typeof document !== "undefined" && document.getElementById("program")) {
  mount();
}
