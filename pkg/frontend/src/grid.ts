// Class-id grid with brush painting, selection mask and undo.
//
// The grid is model-resolution native: painting happens on the raw cell
// lattice and the display layer zooms it, so class ids never get resampled.

export interface Brush {
  classId: number;
  radius: number;
}

export type Point = { x: number; y: number };

function distToSegment(p: Point, a: Point, b: Point): number {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const lenSq = dx * dx + dy * dy;
  let t = lenSq === 0 ? 0 : ((p.x - a.x) * dx + (p.y - a.y) * dy) / lenSq;
  t = Math.max(0, Math.min(1, t));
  const qx = a.x + t * dx;
  const qy = a.y + t * dy;
  return Math.hypot(p.x - qx, p.y - qy);
}

export class CanvasState {
  readonly size: number;
  readonly numClasses: number;
  grid: Uint8Array;
  selection: Uint8Array; // 1 = regenerate
  private undoStack: Uint8Array[] = [];
  private redoStack: Uint8Array[] = [];

  constructor(size: number, numClasses: number, fill = 0) {
    if (fill < 0 || fill >= numClasses) throw new Error(`class id ${fill} out of range`);
    this.size = size;
    this.numClasses = numClasses;
    this.grid = new Uint8Array(size * size).fill(fill);
    this.selection = new Uint8Array(size * size);
  }

  at(x: number, y: number): number {
    return this.grid[y * this.size + x];
  }

  private pushUndo(): void {
    this.undoStack.push(this.grid.slice());
    this.redoStack.length = 0;
    if (this.undoStack.length > 256) this.undoStack.shift();
  }

  /** Set every cell within `brush.radius` of the stroke path. A single
   * point paints a disc. Returns the number of cells changed. */
  paint(path: Point[], brush: Brush): number {
    if (brush.classId < 0 || brush.classId >= this.numClasses) {
      throw new Error(`class id ${brush.classId} not in palette`);
    }
    if (path.length === 0) return 0;
    this.pushUndo();
    let changed = 0;
    const segs: [Point, Point][] = [];
    if (path.length === 1) {
      segs.push([path[0], path[0]]);
    } else {
      for (let i = 0; i + 1 < path.length; i++) segs.push([path[i], path[i + 1]]);
    }
    for (let y = 0; y < this.size; y++) {
      for (let x = 0; x < this.size; x++) {
        const p = { x, y };
        for (const [a, b] of segs) {
          if (distToSegment(p, a, b) <= brush.radius) {
            const idx = y * this.size + x;
            if (this.grid[idx] !== brush.classId) {
              this.grid[idx] = brush.classId;
              changed++;
            }
            break;
          }
        }
      }
    }
    return changed;
  }

  fill(classId: number): void {
    if (classId < 0 || classId >= this.numClasses) {
      throw new Error(`class id ${classId} not in palette`);
    }
    this.pushUndo();
    this.grid.fill(classId);
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.redoStack.push(this.grid);
    this.grid = prev;
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (!next) return false;
    this.undoStack.push(this.grid);
    this.grid = next;
    return true;
  }

  /** Paint the selection mask with the same stroke mechanics. */
  select(path: Point[], radius: number, value: 1 | 0 = 1): void {
    const segs: [Point, Point][] = [];
    if (path.length === 0) return;
    if (path.length === 1) segs.push([path[0], path[0]]);
    else for (let i = 0; i + 1 < path.length; i++) segs.push([path[i], path[i + 1]]);
    for (let y = 0; y < this.size; y++) {
      for (let x = 0; x < this.size; x++) {
        for (const [a, b] of segs) {
          if (distToSegment({ x, y }, a, b) <= radius) {
            this.selection[y * this.size + x] = value;
            break;
          }
        }
      }
    }
  }

  clearSelection(): void {
    this.selection.fill(0);
  }

  selectionEmpty(): boolean {
    return !this.selection.some((v) => v !== 0);
  }

  toRows(): number[][] {
    const rows: number[][] = [];
    for (let y = 0; y < this.size; y++) {
      rows.push(Array.from(this.grid.subarray(y * this.size, (y + 1) * this.size)));
    }
    return rows;
  }

  loadGrid(cells: Uint8Array | number[]): void {
    const arr = Uint8Array.from(cells);
    if (arr.length !== this.size * this.size) {
      throw new Error(`grid has ${arr.length} cells, expected ${this.size * this.size}`);
    }
    for (const v of arr) {
      if (v >= this.numClasses) throw new Error(`class id ${v} not in palette`);
    }
    this.pushUndo();
    this.grid = arr;
  }
}
