/*
    Message schema of the player protocol.

    The server speaks length-delimited JSON over plain TCP and bare JSON
    text frames over WebSocket; either way every message is one object
    with a "type" field, and server messages carry a per-connection
    monotone "seq".  Field names mirror the engine's snake_case exactly.
 */

export interface RegionRender {
  name: string;
  state: string;
  shape: string;
  x: number;
  y: number;
  size_x: number;
  size_y: number;
  image: string | null;
  image_missing: boolean;
  image_x: number;
  image_y: number;
  image_size_x: number | null;
  image_size_y: number | null;
  image_animated: boolean;
  text: string | null;
  text_x: number;
  text_y: number;
  font: string | null;
  font_size: number;
  font_style: string | null;
  font_color: string;
  border_width: number;
  border_color: string | null;
  activation_progress: number;
  bar_x: number;
  bar_y: number;
  scale: number;
  rotation_deg: number;
  anim_dx: number;
  anim_dy: number;
}

export interface RenderFrame {
  frame_seq: number;
  t_ms: number;
  scene: string;
  background_color: string | null;
  background_image: string | null;
  regions: RegionRender[];
  blackout_on: boolean;
  blackout_degree: number;
  blackout_color: string;
  spotlight_on: boolean;
  spotlight_radius: number;
  spotlight_x: number | null;
  spotlight_y: number | null;
}

export interface EngineEvent {
  t_ms: number;
  kind: string;
  scene: string;
  region: string;
  payload: string;
}

export interface HelloMessage {
  type: "hello";
  seq: number;
  protocol_version: number;
  screen_x: number;
  screen_y: number;
  dwell_ms: number;
  tick_ms: number;
  seed: number;
}

export interface SceneSummary {
  name: string;
  regions: string[];
}

export interface DocumentSummaryMessage {
  type: "document_summary";
  seq: number;
  language: string;
  default_scene: string | null;
  pause_scene: string | null;
  scenes: SceneSummary[];
}

export interface FrameMessage {
  type: "frame";
  seq: number;
  frame: RenderFrame;
}

export interface EventMessage {
  type: "event";
  seq: number;
  event: EngineEvent;
}

export interface ErrorMessage {
  type: "error";
  seq: number;
  message: string;
}

export interface ByeMessage {
  type: "bye";
  seq: number;
}

export type ServerMessage =
  | HelloMessage
  | DocumentSummaryMessage
  | FrameMessage
  | EventMessage
  | ErrorMessage
  | ByeMessage;

export interface InputMessage {
  type: "input";
  x: number;
  y: number;
  valid: boolean;
}

export interface KeyMessage {
  type: "key";
  name: string;
}

export interface ControlMessage {
  type: "control";
  action: "stop" | "pause";
}

export type ClientMessage = InputMessage | KeyMessage | ControlMessage;

export function parseServerMessage(text: string): ServerMessage {
  const raw = JSON.parse(text) as { type?: unknown; seq?: unknown };
  if (typeof raw.type !== "string" || typeof raw.seq !== "number") {
    throw new Error("malformed server message: " + text.slice(0, 80));
  }
  return raw as ServerMessage;
}

export function encodeClientMessage(message: ClientMessage): string {
  return JSON.stringify(message);
}
