/** North-up camera: world meters -> canvas pixels with zoom and pan.
 * Geometry readouts are world-space only, so they are zoom invariant. */

export class Camera {
  centerX = 0;  // world m
  centerY = 0;
  pixelsPerMeter = 0.02;

  constructor(public width: number, public height: number) {}

  toScreen(x: number, y: number): { sx: number; sy: number } {
    return {
      sx: this.width / 2 + (x - this.centerX) * this.pixelsPerMeter,
      sy: this.height / 2 - (y - this.centerY) * this.pixelsPerMeter,
    };
  }

  toWorld(sx: number, sy: number): { x: number; y: number } {
    return {
      x: this.centerX + (sx - this.width / 2) / this.pixelsPerMeter,
      y: this.centerY - (sy - this.height / 2) / this.pixelsPerMeter,
    };
  }

  zoomAt(sx: number, sy: number, factor: number): void {
    const anchor = this.toWorld(sx, sy);
    this.pixelsPerMeter = Math.min(10, Math.max(1e-4, this.pixelsPerMeter * factor));
    const moved = this.toWorld(sx, sy);
    this.centerX += anchor.x - moved.x;
    this.centerY += anchor.y - moved.y;
  }

  panPixels(dx: number, dy: number): void {
    this.centerX -= dx / this.pixelsPerMeter;
    this.centerY += dy / this.pixelsPerMeter;
  }

  /** Frame every entity with some margin. */
  fit(points: { x: number; y: number }[], margin = 1.3): void {
    if (points.length === 0) return;
    const xs = points.map((p) => p.x);
    const ys = points.map((p) => p.y);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    this.centerX = (minX + maxX) / 2;
    this.centerY = (minY + maxY) / 2;
    const spanX = Math.max(maxX - minX, 1000) * margin;
    const spanY = Math.max(maxY - minY, 1000) * margin;
    this.pixelsPerMeter = Math.min(this.width / spanX, this.height / spanY);
  }
}
