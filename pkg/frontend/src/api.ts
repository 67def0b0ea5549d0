// Thin fetch client for the gateway. Base URL is empty when the UI is
// served by the gateway itself under /ui/.

import type {
  BufferPayload,
  OrderStatusPayload,
  OrdersPayload,
  OverrideForm,
  Transition,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public serverMessage: string,
  ) {
    super(`HTTP ${status}: ${serverMessage}`);
  }
}

async function getJson<T>(base: string, path: string): Promise<T> {
  const response = await fetch(base + path, {
    headers: { Accept: "application/json" },
  });
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as T;
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.message === "string" ? body.message : response.statusText;
  } catch {
    return response.statusText;
  }
}

export function getBuffer(base: string, dataPoint: string): Promise<BufferPayload> {
  return getJson(base, `/api/datapoints/${encodeURIComponent(dataPoint)}/buffer`);
}

export function getOrderStatus(base: string, order: string): Promise<OrderStatusPayload> {
  return getJson(base, `/api/orders/${encodeURIComponent(order)}/status`);
}

export function getOrders(base: string): Promise<OrdersPayload> {
  return getJson(base, "/api/orders");
}

export async function postOverride(
  base: string,
  form: OverrideForm,
): Promise<Transition> {
  const response = await fetch(base + "/api/override", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(form),
  });
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  const body = await response.json();
  return body.transition as Transition;
}
