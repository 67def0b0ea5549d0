// Order timeline rendering from a captured status payload.

import { describe, expect, it } from "vitest";
import { orderViewElement, ordersTableElement } from "../src/orders.js";
import type { OrderStatusPayload, OrdersPayload } from "../src/types.js";
import statusFixture from "./fixtures/order_status_midrun.json";

const status = statusFixture as OrderStatusPayload;

describe("orderViewElement", () => {
  it("renders one timeline per ticket with every step", () => {
    const element = orderViewElement(document, status);
    expect(element.dataset.order).toBe("SO-1001");
    const timelines = element.querySelectorAll(".ticket-timeline");
    expect(timelines).toHaveLength(status.tickets.length);
    const steps = timelines[0].querySelectorAll("tr.step");
    expect(steps).toHaveLength(status.tickets[0].steps.length);
  });

  it("shows per-step status straight from the payload", () => {
    const element = orderViewElement(document, status);
    const rows = element.querySelectorAll("tr.step");
    status.tickets[0].steps.forEach((step, index) => {
      const cells = rows[index].querySelectorAll("td");
      expect(cells[1].textContent).toBe(step.workCenter);
      expect(cells[2].textContent).toBe(step.skipped ? "Skipped" : step.status);
    });
  });

  it("badges steps that carry alerts", () => {
    const withAlert = structuredClone(status);
    withAlert.tickets[0].alerts = [{
      ticket: withAlert.tickets[0].ticket, seq: 2, kind: "LateFinish",
      planned_us: 0, observed_or_now_us: 1, raised_at_us: 1,
    }];
    const element = orderViewElement(document, withAlert);
    const badged = element.querySelector('tr.step[data-seq="2"] .alert-badge');
    expect(badged?.textContent).toBe("LATE");
    expect(element.querySelector('tr.step[data-seq="1"] .alert-badge')).toBeNull();
  });
});

describe("ordersTableElement", () => {
  it("lists orders with links", () => {
    const payload: OrdersPayload = {
      generated_at_us: 1,
      orders: [{
        order: "SO-1001", type: "customer", product: "P-77", quantity: 4,
        route: "R-1", tickets: 1, completed: 0, exited: 0, alerts: 0,
      }],
    };
    const element = ordersTableElement(document, payload);
    expect(element.querySelector('tr[data-order="SO-1001"]')).not.toBeNull();
    expect(element.querySelector("a")?.getAttribute("href"))
      .toBe("?order=SO-1001");
  });
});
