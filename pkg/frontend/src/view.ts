/*
    Client-side session state.  Everything the renderer and the status
    line need lives here; socket callbacks mutate it and the animation
    loop reads it.  The view never simulates the engine; it only keeps
    the latest frame the server sent.
 */

import {
  DocumentSummaryMessage,
  EngineEvent,
  HelloMessage,
  RenderFrame,
  ServerMessage,
} from "./protocol.js";

export type ConnectionStatus =
  | "connecting"
  | "connected"
  | "closed"
  | "stopped";

export const TICKER_LIMIT = 8;

export class ViewState {
  status: ConnectionStatus = "connecting";
  hello: HelloMessage | null = null;
  summary: DocumentSummaryMessage | null = null;
  frame: RenderFrame | null = null;
  ticker: EngineEvent[] = [];
  warning = "";
  pointerAsGaze = true;
  private lastSeq = -1;

  /** Called when a (re)connection is established; seq starts over. */
  connected(): void {
    this.status = "connected";
    this.warning = "";
    this.lastSeq = -1;
  }

  disconnected(): void {
    if (this.status !== "stopped") {
      this.status = "closed";
    }
  }

  apply(message: ServerMessage): void {
    if (message.seq <= this.lastSeq) {
      this.warning = "out-of-order message ignored";
      return;
    }
    this.lastSeq = message.seq;
    switch (message.type) {
      case "hello":
        this.hello = message;
        break;
      case "document_summary":
        this.summary = message;
        break;
      case "frame":
        this.frame = message.frame;
        break;
      case "event":
        this.ticker.push(message.event);
        if (this.ticker.length > TICKER_LIMIT) {
          this.ticker.splice(0, this.ticker.length - TICKER_LIMIT);
        }
        break;
      case "error":
        this.warning = message.message;
        break;
      case "bye":
        this.status = "stopped";
        break;
    }
  }
}
