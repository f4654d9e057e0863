/*
    Canvas renderer.  A pure function of the latest frame, the asset
    map and the letterbox transform; no engine state is simulated
    here; dwelling progress, blackout and spotlight all arrive inside
    the frame.

    The activation bar (unspecified upstream) is drawn as a
    left-to-right track of the region's width anchored at the frame's
    bar position, which defaults to the region center.
 */

import { RegionRender, RenderFrame } from "./protocol.js";
import { LetterboxTransform } from "./transform.js";

export const BAR_HEIGHT = 6;
const BAR_TRACK = "rgba(255,255,255,0.35)";
const BAR_FILL = "#ffd633";
const PLACEHOLDER_FILL = "#d0d0d0";
const PLACEHOLDER_LINE = "#808080";
const DEFAULT_BACKGROUND = "#ffffff";

export interface ImageAsset {
  source: CanvasImageSource;
  width: number;
  height: number;
}

export interface AssetMap {
  image(name: string): ImageAsset | null;
}

export const NO_ASSETS: AssetMap = { image: () => null };

/*
    Structural subset of CanvasRenderingContext2D used below; tests
    substitute a recording fake.
 */
export interface Context2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  save(): void;
  restore(): void;
  setTransform(
    a: number, b: number, c: number, d: number, e: number, f: number,
  ): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
  scale(x: number, y: number): void;
  beginPath(): void;
  rect(x: number, y: number, w: number, h: number): void;
  ellipse(
    x: number, y: number, radiusX: number, radiusY: number,
    rotation: number, startAngle: number, endAngle: number,
  ): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fill(fillRule?: CanvasFillRule): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  drawImage(
    image: CanvasImageSource, x: number, y: number, w: number, h: number,
  ): void;
}

export function render(
  ctx: Context2D,
  frame: RenderFrame,
  transform: LetterboxTransform,
  assets: AssetMap,
): void {
  ctx.save();
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#000000";
  ctx.fillRect(0, 0, transform.viewWidth, transform.viewHeight);

  ctx.setTransform(
    transform.scale, 0, 0, transform.scale,
    transform.offsetX, transform.offsetY,
  );
  drawBackground(ctx, frame, transform, assets);
  for (const region of frame.regions) {
    drawRegion(ctx, region, assets);
  }
  if (frame.blackout_on) {
    drawBlackout(ctx, frame, transform);
    // the veil covers everything except regions currently reacting
    for (const region of frame.regions) {
      if (region.state === "reacting") {
        drawRegion(ctx, region, assets);
      }
    }
  }
  if (frame.spotlight_on) {
    drawSpotlight(ctx, frame, transform);
  }
  ctx.restore();
}

function drawBackground(
  ctx: Context2D,
  frame: RenderFrame,
  transform: LetterboxTransform,
  assets: AssetMap,
): void {
  ctx.fillStyle = frame.background_color ?? DEFAULT_BACKGROUND;
  ctx.fillRect(0, 0, transform.designX, transform.designY);
  if (frame.background_image !== null) {
    const asset = assets.image(frame.background_image);
    if (asset !== null) {
      ctx.drawImage(
        asset.source, 0, 0, transform.designX, transform.designY);
    }
  }
}

function shapePath(ctx: Context2D, region: RegionRender): void {
  ctx.beginPath();
  if (region.shape === "rectangle") {
    ctx.rect(-region.size_x / 2, -region.size_y / 2,
             region.size_x, region.size_y);
  } else {
    ctx.ellipse(0, 0, region.size_x / 2, region.size_y / 2,
                0, 0, Math.PI * 2);
  }
}

function drawRegion(
  ctx: Context2D,
  region: RegionRender,
  assets: AssetMap,
): void {
  ctx.save();
  ctx.translate(region.x + region.anim_dx, region.y + region.anim_dy);
  if (region.rotation_deg !== 0) {
    ctx.rotate((region.rotation_deg * Math.PI) / 180);
  }
  if (region.scale !== 1) {
    ctx.scale(region.scale, region.scale);
  }

  if (region.image !== null) {
    const asset = region.image_missing ? null : assets.image(region.image);
    const width = region.image_size_x ?? asset?.width ?? region.size_x;
    const height = region.image_size_y ?? asset?.height ?? region.size_y;
    const left = region.image_x - region.x - width / 2;
    const top = region.image_y - region.y - height / 2;
    if (asset !== null) {
      ctx.drawImage(asset.source, left, top, width, height);
    } else {
      drawPlaceholder(ctx, left, top, width, height);
    }
  }

  if (region.text !== null) {
    const style = region.font_style ? region.font_style + " " : "";
    const family = region.font ?? "sans-serif";
    ctx.font = style + region.font_size + "px " + family;
    ctx.fillStyle = region.font_color;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(region.text, region.text_x - region.x,
                 region.text_y - region.y);
  }

  if (region.border_width > 0 && region.border_color !== null) {
    shapePath(ctx, region);
    ctx.lineWidth = region.border_width;
    ctx.strokeStyle = region.border_color;
    ctx.stroke();
  }
  ctx.restore();

  if (region.state === "activated" && region.activation_progress > 0) {
    drawActivationBar(ctx, region);
  }
}

function drawPlaceholder(
  ctx: Context2D, left: number, top: number,
  width: number, height: number,
): void {
  ctx.fillStyle = PLACEHOLDER_FILL;
  ctx.fillRect(left, top, width, height);
  ctx.beginPath();
  ctx.rect(left, top, width, height);
  ctx.moveTo(left, top);
  ctx.lineTo(left + width, top + height);
  ctx.moveTo(left + width, top);
  ctx.lineTo(left, top + height);
  ctx.lineWidth = 1;
  ctx.strokeStyle = PLACEHOLDER_LINE;
  ctx.stroke();
}

function drawActivationBar(ctx: Context2D, region: RegionRender): void {
  const progress = Math.min(1, Math.max(0, region.activation_progress));
  const left = region.bar_x - region.size_x / 2;
  const top = region.bar_y - BAR_HEIGHT / 2;
  ctx.fillStyle = BAR_TRACK;
  ctx.fillRect(left, top, region.size_x, BAR_HEIGHT);
  ctx.fillStyle = BAR_FILL;
  ctx.fillRect(left, top, region.size_x * progress, BAR_HEIGHT);
}

function drawBlackout(
  ctx: Context2D,
  frame: RenderFrame,
  transform: LetterboxTransform,
): void {
  ctx.save();
  ctx.globalAlpha = frame.blackout_degree / 255;
  ctx.fillStyle = frame.blackout_color;
  ctx.fillRect(0, 0, transform.designX, transform.designY);
  ctx.restore();
}

function drawSpotlight(
  ctx: Context2D,
  frame: RenderFrame,
  transform: LetterboxTransform,
): void {
  ctx.fillStyle = "#000000";
  if (frame.spotlight_x === null || frame.spotlight_y === null) {
    ctx.fillRect(0, 0, transform.designX, transform.designY);
    return;
  }
  ctx.beginPath();
  ctx.rect(0, 0, transform.designX, transform.designY);
  ctx.ellipse(frame.spotlight_x, frame.spotlight_y,
              frame.spotlight_radius, frame.spotlight_radius,
              0, 0, Math.PI * 2);
  ctx.fill("evenodd");
}
