/** CPU reference compositor: premultiplied-alpha bilinear warp plus
 * back-to-front over-compositing. Mirrors the pipeline renderer's math and
 * pins the Canvas2D path via the cross-check fixture test. */

import { planeAffine, effectiveDisparity, isIdentity, Offset } from "./homography.js";
import { Mpi, MpiLayer } from "./mpi.js";

/** Inverse-warp one RGBA layer by a plane affine; samples outside the source
 * are fully transparent. Returns a new h*w*4 buffer. */
export function warpLayer(layer: MpiLayer, bx: number, by: number, w: number): Float64Array {
  const { width, height, rgba } = layer;
  const out = new Float64Array(rgba.length);
  for (let y = 0; y < height; y++) {
    const v = (y + by) / w;
    const y0 = Math.floor(v);
    const fy = v - y0;
    for (let x = 0; x < width; x++) {
      const u = (x + bx) / w;
      const x0 = Math.floor(u);
      const fx = u - x0;
      let r = 0;
      let g = 0;
      let b = 0;
      let a = 0;
      for (let dy = 0; dy <= 1; dy++) {
        const yi = y0 + dy;
        if (yi < 0 || yi >= height) continue;
        const wy = dy === 0 ? 1 - fy : fy;
        for (let dx = 0; dx <= 1; dx++) {
          const xi = x0 + dx;
          if (xi < 0 || xi >= width) continue;
          const wt = wy * (dx === 0 ? 1 - fx : fx);
          if (wt === 0) continue;
          const s = (yi * width + xi) * 4;
          const sa = rgba[s + 3];
          // premultiplied sampling keeps transparent texels from bleeding color
          r += wt * rgba[s] * sa;
          g += wt * rgba[s + 1] * sa;
          b += wt * rgba[s + 2] * sa;
          a += wt * sa;
        }
      }
      const o = (y * width + x) * 4;
      if (a > 1e-12) {
        out[o] = r / a;
        out[o + 1] = g / a;
        out[o + 2] = b / a;
        out[o + 3] = a;
      }
    }
  }
  return out;
}

/** Render the MPI at a translation offset; returns an h*w*3 RGB buffer in [0,1].
 * visible[i] === false hides layer i (all layers shown when omitted). */
export function renderOffset(mpi: Mpi, offset: Offset, visible?: boolean[]): Float64Array {
  const { height, width } = mpi;
  const out = new Float64Array(height * width * 3); // over black background
  mpi.layers.forEach((layer, i) => {
    if (visible && visible[i] === false) return;
    const dEff = effectiveDisparity(layer.disparity, mpi.parallaxScale);
    const aff = planeAffine(mpi.intrinsics, offset, dEff, mpi.parallaxScale);
    const warped = isIdentity(aff) ? layer.rgba : warpLayer(layer, aff.bx, aff.by, aff.w);
    for (let p = 0; p < height * width; p++) {
      const s = p * 4;
      const o = p * 3;
      const a = warped[s + 3];
      out[o] = a * warped[s] + (1 - a) * out[o];
      out[o + 1] = a * warped[s + 1] + (1 - a) * out[o + 1];
      out[o + 2] = a * warped[s + 2] + (1 - a) * out[o + 2];
    }
  });
  return out;
}

/** Mean absolute difference between two RGB buffers, per unit channel. */
export function meanAbsDiff(a: Float64Array, b: Float64Array): number {
  if (a.length !== b.length) throw new Error("buffers differ in length");
  let acc = 0;
  for (let i = 0; i < a.length; i++) acc += Math.abs(a[i] - b[i]);
  return acc / a.length;
}
