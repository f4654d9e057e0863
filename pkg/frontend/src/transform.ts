/*
    Aspect-preserving mapping between the document's design space and
    the canvas viewport.  The scene is scaled to fit entirely inside the
    viewport and centered, leaving letterbox bars on one axis; gaze
    coordinates travel the other way through the exact inverse.
 */

export interface Point {
  x: number;
  y: number;
}

export class LetterboxTransform {
  readonly scale: number;
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    readonly designX: number,
    readonly designY: number,
    readonly viewWidth: number,
    readonly viewHeight: number,
  ) {
    if (designX <= 0 || designY <= 0) {
      throw new Error("design extent must be positive");
    }
    this.scale = Math.min(viewWidth / designX, viewHeight / designY);
    this.offsetX = (viewWidth - designX * this.scale) / 2;
    this.offsetY = (viewHeight - designY * this.scale) / 2;
  }

  toScreen(p: Point): Point {
    return {
      x: p.x * this.scale + this.offsetX,
      y: p.y * this.scale + this.offsetY,
    };
  }

  toDesign(p: Point): Point {
    return {
      x: (p.x - this.offsetX) / this.scale,
      y: (p.y - this.offsetY) / this.scale,
    };
  }

  /** Whether a viewport point lands on the scene rather than a bar. */
  contains(p: Point): boolean {
    const d = this.toDesign(p);
    return d.x >= 0 && d.x <= this.designX && d.y >= 0 && d.y <= this.designY;
  }
}
