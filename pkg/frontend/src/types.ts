// API payload shapes, mirroring the gateway contract one-to-one.

export interface BufferRow {
  ticket: string;
  order: string;
  product: string;
  seq: number;
  workCenter: string;
  queued_since_us: number;
  delayed: boolean;
}

export interface BufferPayload {
  generated_at_us: number;
  data_point: string;
  work_center: string | null;
  as_of_us: number;
  rows: BufferRow[];
}

export interface StepStatus {
  seq: number;
  workCenter: string;
  plannedStart_us: number;
  plannedEnd_us: number;
  status: "Pending" | "Queued" | "Started" | "Done";
  skipped: boolean;
  arrived_us: number | null;
  started_us: number | null;
  completed_us: number | null;
}

export interface AlertPayload {
  ticket: string;
  seq: number;
  kind: string;
  planned_us: number;
  observed_or_now_us: number;
  raised_at_us: number;
}

export interface TicketStatus {
  ticket: string;
  ticket_id: number;
  current_seq: number;
  state: string;
  exited_at_us: number | null;
  steps: StepStatus[];
  alerts: AlertPayload[];
}

export interface OrderStatusPayload {
  generated_at_us: number;
  order: string;
  type: string;
  product: string;
  quantity: number;
  route: string;
  tickets: TicketStatus[];
}

export interface OrderSummary {
  order: string;
  type: string;
  product: string;
  quantity: number;
  route: string;
  tickets: number;
  completed: number;
  exited: number;
  alerts: number;
}

export interface OrdersPayload {
  generated_at_us: number;
  orders: OrderSummary[];
}

export interface Transition {
  kind: string;
  at_us: number;
  ticket: string | null;
  ticket_id: number | null;
  seq: number | null;
  data_point: string | null;
  detail: string;
}

export interface OverrideForm {
  ticket: string;
  workCenter: string;
  operator: string;
  reason: string;
}
