// Page bootstrap. The page mode comes from the query string:
//   ?dp=DP-3     station kiosk for one data point (touch screen)
//   ?order=SO-1  one order's timeline
//   (neither)    plant dashboard: order table
// Each mode polls its endpoint every 2 s (last-write-wins) and listens
// to the transition stream for toasts; a dropped stream degrades to
// polling silently.

import { getBuffer, getOrderStatus, getOrders } from "./api.js";
import { consumeEventStream } from "./events.js";
import { orderViewElement, ordersTableElement } from "./orders.js";
import { startPolling } from "./poll.js";
import { errorBanner, updateStationContainer } from "./station.js";
import {
  overrideFormElement,
  showOutcome,
  submitManualOverride,
} from "./override.js";
import type { Transition } from "./types.js";

const POLL_PERIOD_MS = 2000;
const BASE = "";

function toast(container: HTMLElement, transition: Transition): void {
  const line = document.createElement("p");
  line.className = `toast kind-${transition.kind.toLowerCase()}`;
  const who = transition.ticket ?? "?";
  const where = transition.data_point ?? "";
  line.textContent =
    `${transition.kind} ${who}` +
    (transition.seq !== null ? ` step ${transition.seq}` : "") +
    (where ? ` at ${where}` : "");
  container.prepend(line);
  while (container.children.length > 6) {
    container.lastChild?.remove();
  }
}

function attachToasts(root: HTMLElement): void {
  const tray = document.createElement("div");
  tray.className = "toast-tray";
  root.appendChild(tray);
  consumeEventStream(
    BASE,
    0,
    (transition) => toast(tray, transition),
    () => {
      // stream gone: polling still refreshes the view, stay quiet
    },
  );
}

function stationPage(root: HTMLElement, dataPoint: string): void {
  document.title = `${dataPoint} — station`;
  const queue = document.createElement("div");
  queue.className = "station-container";
  root.appendChild(queue);

  let workCenter: string | null = null;
  startPolling(
    () => getBuffer(BASE, dataPoint),
    (payload) => {
      workCenter = payload.work_center;
      updateStationContainer(queue, payload, workCenter);
    },
    (error) => {
      queue.querySelector(".error-banner")?.remove();
      queue.prepend(errorBanner(document, String(error)));
    },
    POLL_PERIOD_MS,
  );

  const form = overrideFormElement(document, { workCenter: "" }, (values) => {
    void submitManualOverride(BASE, values).then((outcome) =>
      showOutcome(form, outcome),
    );
  });
  root.appendChild(form);
  attachToasts(root);
}

function orderPage(root: HTMLElement, order: string): void {
  document.title = `${order} — order`;
  const container = document.createElement("div");
  container.className = "order-container";
  root.appendChild(container);
  startPolling(
    () => getOrderStatus(BASE, order),
    (payload) => {
      container.querySelector(".error-banner")?.remove();
      container.querySelector(".order-view")?.remove();
      container.appendChild(orderViewElement(document, payload));
    },
    (error) => {
      container.querySelector(".error-banner")?.remove();
      container.prepend(errorBanner(document, String(error)));
    },
    POLL_PERIOD_MS,
  );
  attachToasts(root);
}

function dashboardPage(root: HTMLElement): void {
  document.title = "shop floor — orders";
  const container = document.createElement("div");
  container.className = "dashboard-container";
  root.appendChild(container);
  startPolling(
    () => getOrders(BASE),
    (payload) => {
      container.querySelector(".error-banner")?.remove();
      container.querySelector(".orders-table")?.remove();
      container.appendChild(ordersTableElement(document, payload));
    },
    (error) => {
      container.querySelector(".error-banner")?.remove();
      container.prepend(errorBanner(document, String(error)));
    },
    POLL_PERIOD_MS,
  );
  attachToasts(root);
}

export function boot(root: HTMLElement, search: string): void {
  const params = new URLSearchParams(search);
  const dataPoint = params.get("dp");
  const order = params.get("order");
  if (dataPoint) {
    stationPage(root, dataPoint);
  } else if (order) {
    orderPage(root, order);
  } else {
    dashboardPage(root);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app") as HTMLElement, location.search);
}
