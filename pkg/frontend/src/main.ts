/*
    Browser entry point.  Wires the socket, the view state, the input
    pump and the canvas renderer together.

    URL parameters:
        ?server=host:port   serve endpoint (default: page host, port 8750)
        ?assets=path/       base URL for images, keyed by resource name
 */

import { InputPump } from "./input.js";
import { WebSocketLink } from "./link.js";
import { AssetMap, ImageAsset, render } from "./renderer.js";
import { LetterboxTransform } from "./transform.js";
import { ViewState } from "./view.js";

const RECONNECT_DELAY_MS = 1000;

class HtmlAssetMap implements AssetMap {
  private cache = new Map<string, ImageAsset | null>();

  constructor(private readonly baseUrl: string) {}

  image(name: string): ImageAsset | null {
    const known = this.cache.get(name);
    if (known !== undefined) {
      return known;
    }
    this.cache.set(name, null);
    const element = new Image();
    element.onload = () => {
      this.cache.set(name, {
        source: element,
        width: element.naturalWidth,
        height: element.naturalHeight,
      });
    };
    element.src = this.baseUrl + encodeURIComponent(name);
    return null;
  }
}

function setup(): void {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server")
    ?? (window.location.hostname || "127.0.0.1") + ":8750";
  const assetBase = params.get("assets") ?? "assets/";

  const canvas = document.getElementById("stage") as HTMLCanvasElement;
  const context = canvas.getContext("2d") as CanvasRenderingContext2D;
  const statusLine = document.getElementById("status") as HTMLElement;
  const tickerList = document.getElementById("ticker") as HTMLElement;

  const view = new ViewState();
  const assets = new HtmlAssetMap(assetBase);
  let transform: LetterboxTransform | null = null;

  const link = new WebSocketLink(
    "ws://" + server + "/",
    () => view.connected(),
    (message) => view.apply(message),
    () => {
      view.disconnected();
      if (view.status !== "stopped") {
        window.setTimeout(() => link.connect(), RECONNECT_DELAY_MS);
      }
    },
  );
  const pump = new InputPump(link);

  const resize = () => {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    if (view.hello !== null) {
      transform = new LetterboxTransform(
        view.hello.screen_x, view.hello.screen_y,
        canvas.width, canvas.height);
    }
  };
  window.addEventListener("resize", resize);

  canvas.addEventListener("pointermove", (event: PointerEvent) => {
    if (transform === null || !view.pointerAsGaze) {
      return;
    }
    const box = canvas.getBoundingClientRect();
    const design = transform.toDesign({
      x: event.clientX - box.left,
      y: event.clientY - box.top,
    });
    pump.pointer(design.x, design.y);
  });

  window.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "g") {
      view.pointerAsGaze = !view.pointerAsGaze;
      return;
    }
    pump.key(event.key);
  });

  const describe = (): string => {
    const parts = [view.status as string];
    if (view.summary !== null) {
      parts.push(view.summary.language);
    }
    if (view.frame !== null) {
      parts.push("scene " + view.frame.scene);
    }
    if (!view.pointerAsGaze) {
      parts.push("pointer off");
    }
    const warning = view.warning || pump.warning;
    if (warning) {
      parts.push(warning);
    }
    return parts.join(" | ");
  };

  const loop = () => {
    if (transform === null && view.hello !== null) {
      resize();
    }
    pump.flush();
    if (view.frame !== null && transform !== null) {
      render(context, view.frame, transform, assets);
    }
    statusLine.textContent = describe();
    tickerList.textContent = view.ticker
      .map((e) => e.t_ms + " " + e.kind
        + (e.region ? " " + e.region : ""))
      .join("\n");
    window.requestAnimationFrame(loop);
  };

  resize();
  link.connect();
  window.requestAnimationFrame(loop);
}

setup();
