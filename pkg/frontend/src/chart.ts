// Live practice chart: current volume as a dark blue area, current pitch
// as a solid red line, the previous attempt's volume as a light blue area
// and its pitch as a dashed green line.
//
// The chart accepts only monotonically increasing frame timestamps, so an
// out-of-order frame can never be rendered, and it redraws on every tick
// that delivered new data; driven from requestAnimationFrame (~60 Hz) with
// 10 ms server hops that comfortably holds the >= 10 refreshes/second
// contract (ReplayDriver below is the testable form of that loop).

export interface LiveFrame {
  t: number;
  vol: number;
  f0: number;
}

// The 2D-context surface the chart draws on; a recording stub satisfies
// it in tests, a real CanvasRenderingContext2D satisfies it in the app.
export interface ChartSurface {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  closePath(): void;
  setLineDash(segments: number[]): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface ChartOptions {
  windowSeconds: number;
  maxF0: number;
  maxVol: number;
}

const DEFAULTS: ChartOptions = { windowSeconds: 6, maxF0: 500, maxVol: 0.7 };

export class PracticeChart {
  renderCount = 0;
  droppedOutOfOrder = 0;
  private frames: LiveFrame[] = [];
  private renderedT: number[] = [];
  private baselineVol: number[] = [];
  private baselineF0: number[] = [];
  private baselineHop = 0.01;
  private dirty = false;
  private readonly opts: ChartOptions;

  constructor(
    private readonly surface: ChartSurface,
    private readonly width: number,
    private readonly height: number,
    opts: Partial<ChartOptions> = {},
  ) {
    this.opts = { ...DEFAULTS, ...opts };
  }

  // Returns false (and renders nothing, ever) for a frame that is not
  // strictly newer than the last accepted one.
  push(frame: LiveFrame): boolean {
    const last = this.frames[this.frames.length - 1];
    if (last !== undefined && frame.t <= last.t) {
      this.droppedOutOfOrder += 1;
      return false;
    }
    this.frames.push(frame);
    this.dirty = true;
    return true;
  }

  pushAll(frames: LiveFrame[]): void {
    for (const frame of frames) this.push(frame);
  }

  setBaseline(vol: number[], f0: number[], hopSeconds = 0.01): void {
    this.baselineVol = vol;
    this.baselineF0 = f0;
    this.baselineHop = hopSeconds;
    this.dirty = true;
  }

  clearAttempt(): void {
    this.frames = [];
    this.dirty = true;
  }

  get hasBaseline(): boolean {
    return this.baselineVol.length > 0;
  }

  // Timestamps in render order across all renders; the ordering contract
  // is asserted on this.
  renderedTimestamps(): number[] {
    return this.renderedT.slice();
  }

  renderIfDirty(): boolean {
    if (!this.dirty) return false;
    this.render();
    return true;
  }

  render(): void {
    const s = this.surface;
    s.clearRect(0, 0, this.width, this.height);
    const t1 = this.frames.length
      ? this.frames[this.frames.length - 1]!.t
      : this.opts.windowSeconds;
    const t0 = Math.max(0, t1 - this.opts.windowSeconds);
    const attemptT0 = this.frames.length ? this.frames[0]!.t : 0;

    if (this.hasBaseline) {
      const points: [number, number][] = this.baselineVol.map((v, i) => [
        attemptT0 + i * this.baselineHop,
        v,
      ]);
      this.area(points, t0, t1, "rgba(120, 170, 220, 0.35)");
      const f0points: [number, number][] = this.baselineF0.map((v, i) => [
        attemptT0 + i * this.baselineHop,
        v,
      ]);
      this.line(f0points, t0, t1, "#2e8b57", (v) => this.f0Y(v), [6, 4]);
    }

    const volPoints: [number, number][] = this.frames.map((f) => [f.t, f.vol]);
    this.area(volPoints, t0, t1, "rgba(28, 60, 120, 0.75)");
    const f0Points: [number, number][] = this.frames.map((f) => [f.t, f.f0]);
    this.line(f0Points, t0, t1, "#d62828", (v) => this.f0Y(v), []);

    this.renderedT = this.frames.map((f) => f.t);
    this.renderCount += 1;
    this.dirty = false;
  }

  private x(t: number, t0: number, t1: number): number {
    const span = Math.max(1e-9, t1 - t0);
    return ((t - t0) / span) * this.width;
  }

  private volY(v: number): number {
    const clamped = Math.min(v, this.opts.maxVol) / this.opts.maxVol;
    return this.height - clamped * this.height;
  }

  private f0Y(v: number): number {
    const clamped = Math.min(v, this.opts.maxF0) / this.opts.maxF0;
    return this.height - clamped * this.height;
  }

  private area(
    points: [number, number][],
    t0: number,
    t1: number,
    color: string,
  ): void {
    const visible = points.filter(([t]) => t >= t0 && t <= t1);
    if (!visible.length) return;
    const s = this.surface;
    s.beginPath();
    s.moveTo(this.x(visible[0]![0], t0, t1), this.height);
    for (const [t, v] of visible) s.lineTo(this.x(t, t0, t1), this.volY(v));
    s.lineTo(this.x(visible[visible.length - 1]![0], t0, t1), this.height);
    s.closePath();
    s.fillStyle = color;
    s.fill();
  }

  private line(
    points: [number, number][],
    t0: number,
    t1: number,
    color: string,
    yOf: (v: number) => number,
    dash: number[],
  ): void {
    const s = this.surface;
    s.setLineDash(dash);
    s.strokeStyle = color;
    s.lineWidth = 2;
    s.beginPath();
    let pen = false;
    for (const [t, v] of points) {
      if (t < t0 || t > t1) continue;
      if (v <= 0) {
        pen = false; // unvoiced gap: lift the pen instead of drawing to zero
        continue;
      }
      const x = this.x(t, t0, t1);
      const y = yOf(v);
      if (pen) s.lineTo(x, y);
      else s.moveTo(x, y);
      pen = true;
    }
    s.stroke();
    s.setLineDash([]);
  }
}

// Feeds recorded frames to the chart by timestamp; tick() is called by the
// animation loop (or a fake clock in tests) and refreshes at most once per
// tick, only when something new arrived.
export class ReplayDriver {
  private delivered = 0;

  constructor(
    private readonly chart: PracticeChart,
    private readonly frames: LiveFrame[],
  ) {}

  tick(nowSeconds: number): void {
    while (
      this.delivered < this.frames.length &&
      this.frames[this.delivered]!.t <= nowSeconds
    ) {
      this.chart.push(this.frames[this.delivered]!);
      this.delivered += 1;
    }
    this.chart.renderIfDirty();
  }

  get done(): boolean {
    return this.delivered >= this.frames.length;
  }
}
