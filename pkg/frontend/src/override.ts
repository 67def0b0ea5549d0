// Manual intervention: the one write path the station exposes.
// Client-side validation mirrors the server's EmptyReason rule; a 4xx
// shows the server's message verbatim; a network failure leaves the
// form intact with a retry affordance and no optimistic update.

import { ApiError, postOverride } from "./api.js";
import type { OverrideForm, Transition } from "./types.js";

export type OverrideOutcome =
  | { kind: "ok"; transition: Transition }
  | { kind: "rejected"; status: number; message: string }
  | { kind: "network"; retry: () => Promise<OverrideOutcome> }
  | { kind: "invalid"; missing: string[] };

export function validateOverrideForm(form: OverrideForm): string[] {
  const missing: string[] = [];
  for (const field of ["ticket", "workCenter", "operator", "reason"] as const) {
    if (!form[field] || !form[field].trim()) missing.push(field);
  }
  return missing;
}

export async function submitManualOverride(
  base: string,
  form: OverrideForm,
): Promise<OverrideOutcome> {
  const missing = validateOverrideForm(form);
  if (missing.length > 0) {
    return { kind: "invalid", missing };
  }
  try {
    const transition = await postOverride(base, form);
    return { kind: "ok", transition };
  } catch (error) {
    if (error instanceof ApiError) {
      return { kind: "rejected", status: error.status, message: error.serverMessage };
    }
    return { kind: "network", retry: () => submitManualOverride(base, form) };
  }
}

export function overrideFormElement(
  doc: Document,
  defaults: Partial<OverrideForm>,
  onSubmit: (form: OverrideForm) => void,
): HTMLElement {
  const root = doc.createElement("form");
  root.className = "override-form";
  const fields: Array<[keyof OverrideForm, string]> = [
    ["ticket", "Ticket"],
    ["workCenter", "Work center"],
    ["operator", "Operator"],
    ["reason", "Reason"],
  ];
  for (const [name, label] of fields) {
    const wrap = doc.createElement("label");
    wrap.textContent = label;
    const input = doc.createElement("input");
    input.name = name;
    input.value = defaults[name] ?? "";
    wrap.appendChild(input);
    root.appendChild(wrap);
  }
  const button = doc.createElement("button");
  button.type = "submit";
  button.textContent = "Override";
  root.appendChild(button);
  const outcome = doc.createElement("p");
  outcome.className = "override-outcome";
  root.appendChild(outcome);

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    const value = (name: string): string =>
      (root.querySelector(`input[name=${name}]`) as HTMLInputElement).value;
    onSubmit({
      ticket: value("ticket"),
      workCenter: value("workCenter"),
      operator: value("operator"),
      reason: value("reason"),
    });
  });
  return root;
}

export function showOutcome(root: HTMLElement, outcome: OverrideOutcome): void {
  const target = root.querySelector(".override-outcome") as HTMLElement;
  switch (outcome.kind) {
    case "ok":
      target.textContent = `override recorded: ${outcome.transition.kind} ` +
        `${outcome.transition.ticket} step ${outcome.transition.seq}`;
      target.className = "override-outcome ok";
      break;
    case "invalid":
      target.textContent = `fill in: ${outcome.missing.join(", ")}`;
      target.className = "override-outcome invalid";
      break;
    case "rejected":
      target.textContent = outcome.message;
      target.className = "override-outcome rejected";
      break;
    case "network":
      target.textContent = "gateway unreachable — tap Override to retry";
      target.className = "override-outcome network";
      break;
  }
}
