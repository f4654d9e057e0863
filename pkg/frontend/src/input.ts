/*
    Pointer and keyboard funnel.  Pointer positions arrive in design
    coordinates (already inverse-transformed), are throttled to the
    server's tick rate, and only the newest position per tick is sent.
    While the socket is down, outgoing messages are buffered for up to
    one second, then dropped with a visible warning.
 */

import { ClientMessage } from "./protocol.js";

export const BUFFER_LIMIT_MS = 1000;

export interface InputLink {
  /** Returns false when the socket is not currently open. */
  send(message: ClientMessage): boolean;
}

export class InputPump {
  warning = "";
  private latestX = 0;
  private latestY = 0;
  private dirty = false;
  private lastSent = -Infinity;
  private buffered: { message: ClientMessage; at: number }[] = [];

  constructor(
    private readonly link: InputLink,
    private tickMs = 10,
    private readonly now: () => number = () => Date.now(),
  ) {}

  setTickMs(tickMs: number): void {
    this.tickMs = tickMs;
  }

  pointer(x: number, y: number): void {
    this.latestX = x;
    this.latestY = y;
    this.dirty = true;
  }

  key(name: string): void {
    if (name === "Escape") {
      this.deliver({ type: "control", action: "stop" });
    } else if (name === "Pause") {
      this.deliver({ type: "control", action: "pause" });
    } else {
      this.deliver({ type: "key", name });
    }
  }

  /** Called from the animation loop; sends at most one input per tick. */
  flush(): void {
    if (!this.dirty || this.now() - this.lastSent < this.tickMs) {
      return;
    }
    this.dirty = false;
    this.lastSent = this.now();
    this.deliver({
      type: "input",
      x: this.latestX,
      y: this.latestY,
      valid: true,
    });
  }

  private deliver(message: ClientMessage): void {
    const at = this.now();
    const kept = this.buffered.filter((b) => at - b.at <= BUFFER_LIMIT_MS);
    if (kept.length < this.buffered.length) {
      this.warning = "input dropped while disconnected";
    }
    this.buffered = kept;
    while (this.buffered.length > 0) {
      if (!this.link.send(this.buffered[0].message)) {
        this.buffered.push({ message, at });
        return;
      }
      this.buffered.shift();
    }
    if (!this.link.send(message)) {
      this.buffered.push({ message, at });
    }
  }
}
