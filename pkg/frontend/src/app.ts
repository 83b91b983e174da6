// Browser wiring: paint a layout, generate, select a region, edit.
// All logic that matters lives in grid.ts / png.ts / api.ts; this file
// renders state onto canvases and forwards pointer events.

import { StudioClient, PaletteEntry, b64decode, b64encode } from "./api.js";
import { CanvasState, Point } from "./grid.js";
import { decodeLayoutPng, encodeLayoutPng, Rgb } from "./png.js";

const SERVICE = (window as any).SEMDIFF_SERVICE ?? "http://127.0.0.1:8787";
const ZOOM = 20;

type Mode = "paint" | "select";

class Studio {
  client = new StudioClient(SERVICE);
  state!: CanvasState;
  palette: PaletteEntry[] = [];
  brushClass = 1;
  brushRadius = 1.5;
  mode: Mode = "paint";
  stroke: Point[] = [];
  gallery: string[] = [];
  selectedImage: string | null = null;
  busy = false;

  canvas = document.getElementById("layout") as HTMLCanvasElement;
  overlay = document.getElementById("overlay") as HTMLCanvasElement;
  galleryDiv = document.getElementById("gallery") as HTMLDivElement;
  statusEl = document.getElementById("status") as HTMLSpanElement;
  progressEl = document.getElementById("progress") as HTMLProgressElement;
  resultImg = document.getElementById("result") as HTMLImageElement;

  async init() {
    const pal = await this.client.palette();
    this.palette = pal.classes;
    this.state = new CanvasState(pal.image_size, this.palette.length);
    this.canvas.width = this.canvas.height = pal.image_size * ZOOM;
    this.overlay.width = this.overlay.height = pal.image_size * ZOOM;
    this.buildPaletteButtons();
    this.bindCanvas();
    this.bindControls();
    this.draw();
    this.setStatus(`connected to ${SERVICE}`);
  }

  setStatus(msg: string) {
    this.statusEl.textContent = msg;
  }

  rgbFor(classId: number): Rgb {
    return this.palette[classId].rgb;
  }

  buildPaletteButtons() {
    const host = document.getElementById("palette")!;
    host.innerHTML = "";
    for (const entry of this.palette) {
      const btn = document.createElement("button");
      btn.textContent = `${entry.id} ${entry.name}`;
      btn.style.background = `rgb(${entry.rgb.join(",")})`;
      btn.onclick = () => {
        this.brushClass = entry.id;
        this.setStatus(`brush: class ${entry.id} (${entry.name})`);
      };
      host.appendChild(btn);
    }
  }

  cellFromEvent(ev: MouseEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return {
      x: Math.floor(((ev.clientX - rect.left) / rect.width) * this.state.size),
      y: Math.floor(((ev.clientY - rect.top) / rect.height) * this.state.size),
    };
  }

  bindCanvas() {
    let painting = false;
    this.overlay.onmousedown = (ev) => {
      painting = true;
      this.stroke = [this.cellFromEvent(ev)];
    };
    this.overlay.onmousemove = (ev) => {
      if (!painting) return;
      this.stroke.push(this.cellFromEvent(ev));
    };
    const finish = () => {
      if (!painting) return;
      painting = false;
      if (this.mode === "paint") {
        this.state.paint(this.stroke, { classId: this.brushClass, radius: this.brushRadius });
      } else {
        this.state.select(this.stroke, this.brushRadius, 1);
      }
      this.stroke = [];
      this.draw();
    };
    this.overlay.onmouseup = finish;
    this.overlay.onmouseleave = finish;
  }

  bindControls() {
    const byId = (id: string) => document.getElementById(id)!;
    (byId("radius") as HTMLInputElement).oninput = (e) => {
      this.brushRadius = Number((e.target as HTMLInputElement).value);
    };
    byId("mode-paint").onclick = () => { this.mode = "paint"; this.setStatus("painting classes"); };
    byId("mode-select").onclick = () => { this.mode = "select"; this.setStatus("selecting edit region"); };
    byId("clear-selection").onclick = () => { this.state.clearSelection(); this.draw(); };
    byId("undo").onclick = () => { this.state.undo(); this.draw(); };
    byId("redo").onclick = () => { this.state.redo(); this.draw(); };
    byId("fill").onclick = () => { this.state.fill(this.brushClass); this.draw(); };
    byId("generate").onclick = () => void this.generate();
    byId("edit").onclick = () => void this.editRegion();
    byId("export-layout").onclick = () => this.download("layout.png", this.layoutPng());
    byId("export-log").onclick = () =>
      this.download("request_log.json", new TextEncoder().encode(this.client.exportLog()));
    (byId("import-layout") as HTMLInputElement).onchange = (e) => void this.importLayout(e);
  }

  layoutPng(): Uint8Array {
    return encodeLayoutPng(
      this.state.grid, this.state.size, this.palette.map((p) => p.rgb),
    );
  }

  maskPng(): Uint8Array {
    // reuse the palette encoder: a 2-entry black/white palette mask
    const bw: Rgb[] = [[0, 0, 0], [255, 255, 255]];
    return encodeLayoutPng(this.state.selection, this.state.size, bw);
  }

  params() {
    const num = (id: string) => Number((document.getElementById(id) as HTMLInputElement).value);
    return {
      guidanceScale: num("guidance"),
      steps: num("steps"),
      seed: num("seed"),
      numSamples: num("num-samples"),
    };
  }

  async generate() {
    if (this.busy) return;
    this.busy = true;
    try {
      const p = this.params();
      this.setStatus("generating...");
      const images = await this.client.generate(
        { layoutPngB64: b64encode(this.layoutPng()), ...p },
        (f) => (this.progressEl.value = f),
      );
      this.gallery = images;
      this.renderGallery();
      this.setStatus(`generated ${images.length} sample(s)`);
    } catch (e) {
      this.setStatus(`error: ${e}`);
    } finally {
      this.busy = false;
    }
  }

  async editRegion() {
    if (this.busy) return;
    if (!this.selectedImage) {
      this.setStatus("pick a gallery image to edit first");
      return;
    }
    if (this.state.selectionEmpty()) {
      this.setStatus("select a region to regenerate first");
      return;
    }
    this.busy = true;
    try {
      const p = this.params();
      this.setStatus("editing...");
      const out = await this.client.edit(
        {
          sourcePngB64: this.selectedImage,
          layoutPngB64: b64encode(this.layoutPng()),
          maskPngB64: b64encode(this.maskPng()),
          guidanceScale: p.guidanceScale,
          steps: p.steps,
          seed: p.seed,
        },
        (f) => (this.progressEl.value = f),
      );
      this.resultImg.src = `data:image/png;base64,${out}`;
      this.setStatus("edit done; kept pixels verified client-side");
      this.verifyKeptRegion(this.selectedImage, out);
    } catch (e) {
      this.setStatus(`error: ${e}`);
    } finally {
      this.busy = false;
    }
  }

  /** Client-side check: outside-selection pixels must match the source. */
  verifyKeptRegion(sourceB64: string, resultB64: string) {
    const img = new Image();
    const src = new Image();
    let loaded = 0;
    const onload = () => {
      if (++loaded < 2) return;
      const n = this.state.size;
      const cv = document.createElement("canvas");
      cv.width = cv.height = n;
      const ctx = cv.getContext("2d")!;
      ctx.drawImage(src, 0, 0);
      const a = ctx.getImageData(0, 0, n, n).data;
      ctx.clearRect(0, 0, n, n);
      ctx.drawImage(img, 0, 0);
      const b = ctx.getImageData(0, 0, n, n).data;
      for (let i = 0; i < n * n; i++) {
        if (this.state.selection[i]) continue;
        for (let c = 0; c < 3; c++) {
          if (a[i * 4 + c] !== b[i * 4 + c]) {
            this.setStatus("WARNING: kept region changed");
            return;
          }
        }
      }
    };
    src.onload = onload;
    img.onload = onload;
    src.src = `data:image/png;base64,${sourceB64}`;
    img.src = `data:image/png;base64,${resultB64}`;
  }

  renderGallery() {
    this.galleryDiv.innerHTML = "";
    this.gallery.forEach((b64, i) => {
      const img = document.createElement("img");
      img.src = `data:image/png;base64,${b64}`;
      img.className = "thumb";
      img.title = `sample ${i}`;
      img.onclick = () => {
        this.selectedImage = b64;
        this.resultImg.src = img.src;
        this.setStatus(`selected sample ${i} for editing`);
      };
      this.galleryDiv.appendChild(img);
    });
  }

  async importLayout(e: Event) {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const bytes = new Uint8Array(await file.arrayBuffer());
    try {
      const dec = decodeLayoutPng(bytes);
      if (dec.size !== this.state.size) throw new Error(`size ${dec.size} != ${this.state.size}`);
      this.state.loadGrid(dec.grid);
    } catch {
      // arbitrary PNGs: decode via canvas, map colors to nearest palette entry
      await this.importViaCanvas(bytes);
    }
    this.draw();
  }

  async importViaCanvas(bytes: Uint8Array) {
    const blob = new Blob([bytes as BlobPart], { type: "image/png" });
    const bmp = await createImageBitmap(blob);
    const n = this.state.size;
    const cv = document.createElement("canvas");
    cv.width = cv.height = n;
    const ctx = cv.getContext("2d")!;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(bmp, 0, 0, n, n);
    const data = ctx.getImageData(0, 0, n, n).data;
    const cells = new Uint8Array(n * n);
    for (let i = 0; i < n * n; i++) {
      let best = 0;
      let bestD = Infinity;
      this.palette.forEach((p, k) => {
        const d =
          (p.rgb[0] - data[i * 4]) ** 2 +
          (p.rgb[1] - data[i * 4 + 1]) ** 2 +
          (p.rgb[2] - data[i * 4 + 2]) ** 2;
        if (d < bestD) {
          bestD = d;
          best = k;
        }
      });
      cells[i] = best;
    }
    this.state.loadGrid(cells);
  }

  download(name: string, bytes: Uint8Array) {
    const a = document.createElement("a");
    a.href = URL.createObjectURL(new Blob([bytes as BlobPart]));
    a.download = name;
    a.click();
    URL.revokeObjectURL(a.href);
  }

  draw() {
    const ctx = this.canvas.getContext("2d")!;
    const n = this.state.size;
    for (let y = 0; y < n; y++) {
      for (let x = 0; x < n; x++) {
        const rgb = this.rgbFor(this.state.at(x, y));
        ctx.fillStyle = `rgb(${rgb.join(",")})`;
        ctx.fillRect(x * ZOOM, y * ZOOM, ZOOM, ZOOM);
      }
    }
    const octx = this.overlay.getContext("2d")!;
    octx.clearRect(0, 0, n * ZOOM, n * ZOOM);
    octx.fillStyle = "rgba(0, 255, 0, 0.35)";
    for (let y = 0; y < n; y++) {
      for (let x = 0; x < n; x++) {
        if (this.state.selection[y * n + x]) {
          octx.fillRect(x * ZOOM, y * ZOOM, ZOOM, ZOOM);
        }
      }
    }
  }
}

const studio = new Studio();
void studio.init();
(window as any).studio = studio;
