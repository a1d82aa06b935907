/** WebSocket session with automatic reconnect and resubscribe. */

import { MessageBuilder, parseMessage, ServerMessage } from "./protocol.js";

export interface SessionCallbacks {
  onMessage(msg: ServerMessage | null): void; // null = malformed frame
  onStatus(connected: boolean): void;
}

const BACKOFF_MIN_MS = 500;
const BACKOFF_MAX_MS = 10_000;

export class ConsoleSession {
  private ws: WebSocket | null = null;
  private backoff = BACKOFF_MIN_MS;
  private closed = false;
  readonly builder = new MessageBuilder();

  constructor(private url: string, private callbacks: SessionCallbacks) {}

  connect(): void {
    if (this.closed) return;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoff = BACKOFF_MIN_MS;
      this.callbacks.onStatus(true);
      // fresh snapshot precedes the live stream (no stale ghosts)
      ws.send(this.builder.subscribe());
    };
    ws.onmessage = (event) => {
      this.callbacks.onMessage(parseMessage(String(event.data)));
    };
    ws.onclose = () => {
      this.callbacks.onStatus(false);
      this.scheduleReconnect();
    };
    ws.onerror = () => {
      ws.close();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    setTimeout(() => this.connect(), this.backoff);
    this.backoff = Math.min(this.backoff * 2, BACKOFF_MAX_MS);
  }

  send(frame: string): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
