/** Browser entry point: loads an MPI container over HTTP (?url=<manifest dir>),
 * renders layers as transformed canvases, and steers the camera from pointer
 * and wheel input. Keyboard: R resets the pose, Space toggles autoplay,
 * digits 1-9 toggle layers. */

import { effectiveDisparity, planeAffine, toCanvasTransform } from "./homography.js";
import { assembleMpi, ContainerError, layerFromBytes, Mpi, validateManifest } from "./mpi.js";
import {
  dragToPose,
  initialState,
  resetPose,
  toggleLayer,
  ViewerState,
  wheelToPose,
} from "./state.js";

interface LoadedViewer {
  mpi: Mpi;
  bitmaps: ImageBitmap[];
  state: ViewerState;
}

function banner(message: string): void {
  const el = document.getElementById("banner");
  if (el) {
    el.textContent = message;
    el.style.display = "block";
  }
}

async function fetchLayerBitmap(url: string): Promise<{ bitmap: ImageBitmap; bytes: Uint8ClampedArray; width: number; height: number }> {
  const resp = await fetch(url);
  if (!resp.ok) throw new ContainerError(`fetch failed (${resp.status}): ${url}`);
  const blob = await resp.blob();
  const bitmap = await createImageBitmap(blob);
  const off = new OffscreenCanvas(bitmap.width, bitmap.height);
  const ctx = off.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { bitmap, bytes: data.data, width: bitmap.width, height: bitmap.height };
}

export async function loadContainer(baseUrl: string): Promise<LoadedViewer> {
  const root = baseUrl.replace(/\/+$/, "");
  const resp = await fetch(`${root}/manifest.json`);
  if (!resp.ok) throw new ContainerError(`fetch failed (${resp.status}): ${root}/manifest.json`);
  const manifest = validateManifest(await resp.json());
  const layers = [];
  const bitmaps: ImageBitmap[] = [];
  for (const entry of manifest.layers) {
    const { bitmap, bytes, width, height } = await fetchLayerBitmap(`${root}/${entry.file}`);
    bitmaps.push(bitmap);
    layers.push(layerFromBytes(bytes, width, height, entry.disparity));
  }
  const mpi = assembleMpi(manifest, layers);
  return { mpi, bitmaps, state: initialState(mpi.layers.length) };
}

function draw(viewer: LoadedViewer, canvas: HTMLCanvasElement): void {
  const { mpi, bitmaps, state } = viewer;
  const ctx = canvas.getContext("2d")!;
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.fillStyle = "black";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const scale = state.parallaxScale ?? mpi.parallaxScale;
  mpi.layers.forEach((layer, i) => {
    if (!state.visible[i]) return;
    const dEff = effectiveDisparity(layer.disparity, scale);
    const { sc, ex, ey } = toCanvasTransform(planeAffine(mpi.intrinsics, state.offset, dEff, scale));
    ctx.setTransform(sc, 0, 0, sc, ex, ey);
    ctx.drawImage(bitmaps[i], 0, 0);
  });
}

function layerPanel(viewer: LoadedViewer, onChange: () => void): void {
  const panel = document.getElementById("layers");
  if (!panel) return;
  panel.innerHTML = "";
  viewer.mpi.layers.forEach((layer, i) => {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = true;
    box.addEventListener("change", () => {
      viewer.state = toggleLayer(viewer.state, i);
      onChange();
    });
    label.appendChild(box);
    label.append(` layer ${i} (d=${layer.disparity.toFixed(3)})`);
    panel.appendChild(label);
  });
}

export async function startViewer(): Promise<void> {
  const canvas = document.getElementById("view") as HTMLCanvasElement | null;
  if (!canvas) return;
  const url = new URLSearchParams(window.location.search).get("url");
  if (!url) {
    banner("pass ?url=<container directory> to load an MPI");
    return;
  }
  let viewer: LoadedViewer;
  try {
    viewer = await loadContainer(url);
  } catch (err) {
    banner(err instanceof Error ? err.message : String(err));
    return;
  }
  canvas.width = viewer.mpi.width;
  canvas.height = viewer.mpi.height;
  const redraw = () => draw(viewer, canvas);
  layerPanel(viewer, redraw);

  let dragging = false;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    viewer.state = dragToPose(viewer.state, e.movementX, e.movementY);
  });
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    viewer.state = wheelToPose(viewer.state, e.deltaY);
  });
  window.addEventListener("keydown", (e) => {
    if (e.key === "r") viewer.state = resetPose(viewer.state);
    else if (e.key === " ") viewer.state = { ...viewer.state, autoplay: !viewer.state.autoplay };
    else if (/^[1-9]$/.test(e.key)) {
      viewer.state = toggleLayer(viewer.state, Number(e.key) - 1);
      layerPanel(viewer, redraw);
    }
  });

  let t = 0;
  const loop = () => {
    if (viewer.state.autoplay) {
      t += 1 / 60;
      viewer.state = {
        ...viewer.state,
        offset: {
          tx: viewer.state.maxOffset * Math.sin(t),
          ty: 0,
          tz: viewer.state.offset.tz,
        },
      };
    }
    redraw();
    requestAnimationFrame(loop);
  };
  loop();
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  void startViewer();
}
