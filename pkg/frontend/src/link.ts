/*
    WebSocket transport.  The server upgrades its plain socket to
    WebSocket when it sees an HTTP GET, so the browser connects
    directly to the serve endpoint; every message is one JSON text
    frame.
 */

import {
  ClientMessage,
  encodeClientMessage,
  parseServerMessage,
  ServerMessage,
} from "./protocol.js";
import { InputLink } from "./input.js";

export class WebSocketLink implements InputLink {
  private socket: WebSocket | null = null;

  constructor(
    private readonly url: string,
    private readonly onOpen: () => void,
    private readonly onMessage: (message: ServerMessage) => void,
    private readonly onClose: () => void,
  ) {}

  connect(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => this.onOpen();
    socket.onmessage = (event: MessageEvent) => {
      if (typeof event.data === "string") {
        this.onMessage(parseServerMessage(event.data));
      }
    };
    socket.onclose = () => {
      if (this.socket === socket) {
        this.socket = null;
      }
      this.onClose();
    };
    socket.onerror = () => socket.close();
  }

  send(message: ClientMessage): boolean {
    if (this.socket === null || this.socket.readyState !== WebSocket.OPEN) {
      return false;
    }
    this.socket.send(encodeClientMessage(message));
    return true;
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }
}
