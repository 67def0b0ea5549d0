// Manager views: order timeline (planned vs actual per step, alert
// badges) and the plant-wide order table. Pure projections of the
// status payloads.

import type { OrderStatusPayload, OrdersPayload, StepStatus } from "./types.js";

function formatClockUs(us: number | null): string {
  if (us === null) return "—";
  return new Date(us / 1000).toISOString().slice(11, 19);
}

function stepRow(doc: Document, step: StepStatus, late: boolean): HTMLElement {
  const row = doc.createElement("tr");
  row.className = step.skipped ? "step skipped" : `step ${step.status.toLowerCase()}`;
  row.dataset.seq = String(step.seq);
  const cells = [
    String(step.seq),
    step.workCenter,
    step.skipped ? "Skipped" : step.status,
    `${formatClockUs(step.plannedStart_us)} – ${formatClockUs(step.plannedEnd_us)}`,
    `${formatClockUs(step.arrived_us)} / ${formatClockUs(step.completed_us)}`,
  ];
  for (const text of cells) {
    const cell = doc.createElement("td");
    cell.textContent = text;
    row.appendChild(cell);
  }
  const badge = doc.createElement("td");
  if (late) {
    const mark = doc.createElement("span");
    mark.className = "alert-badge";
    mark.textContent = "LATE";
    badge.appendChild(mark);
  }
  row.appendChild(badge);
  return row;
}

export function orderViewElement(
  doc: Document,
  status: OrderStatusPayload,
): HTMLElement {
  const root = doc.createElement("section");
  root.className = "order-view";
  root.dataset.order = status.order;
  const heading = doc.createElement("h1");
  heading.textContent =
    `${status.order} (${status.type}) — ${status.product} ×${status.quantity} ` +
    `via ${status.route}`;
  root.appendChild(heading);

  for (const ticket of status.tickets) {
    const block = doc.createElement("article");
    block.className = "ticket-timeline";
    block.dataset.ticket = ticket.ticket;
    const title = doc.createElement("h2");
    title.textContent =
      `${ticket.ticket} — ${ticket.state} (step ${ticket.current_seq}/` +
      `${ticket.steps.length})`;
    block.appendChild(title);

    const lateSeqs = new Set(ticket.alerts.map((a) => a.seq));
    const table = doc.createElement("table");
    const head = doc.createElement("tr");
    for (const label of ["#", "work center", "status", "planned", "actual", ""]) {
      const cell = doc.createElement("th");
      cell.textContent = label;
      head.appendChild(cell);
    }
    table.appendChild(head);
    for (const step of ticket.steps) {
      table.appendChild(stepRow(doc, step, lateSeqs.has(step.seq)));
    }
    block.appendChild(table);
    root.appendChild(block);
  }
  return root;
}

export function ordersTableElement(
  doc: Document,
  payload: OrdersPayload,
): HTMLElement {
  const root = doc.createElement("section");
  root.className = "orders-table";
  const table = doc.createElement("table");
  const head = doc.createElement("tr");
  for (const label of ["order", "type", "product", "qty", "route",
                       "tickets", "completed", "exited", "alerts"]) {
    const cell = doc.createElement("th");
    cell.textContent = label;
    head.appendChild(cell);
  }
  table.appendChild(head);
  for (const order of payload.orders) {
    const row = doc.createElement("tr");
    row.dataset.order = order.order;
    if (order.alerts > 0) row.className = "has-alerts";
    for (const value of [order.order, order.type, order.product,
                         order.quantity, order.route, order.tickets,
                         order.completed, order.exited, order.alerts]) {
      const cell = doc.createElement("td");
      cell.textContent = String(value);
      row.appendChild(cell);
    }
    const link = doc.createElement("a");
    link.href = `?order=${encodeURIComponent(order.order)}`;
    link.textContent = "open";
    const cell = doc.createElement("td");
    cell.appendChild(link);
    row.appendChild(cell);
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}
