/** Per-plane transforms for translation-only camera offsets.
 *
 * For a fronto-parallel plane at inverse depth d*s and a pure translation
 * t = (tx, ty, tz), the target->source homography
 * H = K (I - t n^T d s) K^-1 with n = (0,0,1) collapses to an affine map:
 *
 *   u = (x - fx*d*s*tx - cx*d*s*tz) / (1 - d*s*tz)
 *   v = (y - fy*d*s*ty - cy*d*s*tz) / (1 - d*s*tz)
 *
 * i.e. a uniform scale about the principal point plus a translation. This is
 * the specialization the viewer needs: no rotation, so Canvas2D transforms
 * render it exactly.
 */

import { Intrinsics } from "./mpi.js";

export const EPS_D = 1e-4; // inverse-depth floor shared with the pipeline renderer

export interface Offset {
  tx: number;
  ty: number;
  tz: number;
}

/** Target->source affine map: [u, v] = [(x + bx) / w, (y + by) / w]. */
export interface PlaneAffine {
  bx: number;
  by: number;
  w: number;
}

export function effectiveDisparity(disparity: number, parallaxScale: number): number {
  return disparity + EPS_D / parallaxScale;
}

export function planeAffine(
  k: Intrinsics,
  offset: Offset,
  disparity: number,
  parallaxScale: number,
): PlaneAffine {
  if (!(disparity > 0)) {
    throw new Error("plane disparity must be positive");
  }
  const ds = disparity * parallaxScale;
  const w = 1 - ds * offset.tz;
  if (w <= 1e-12) {
    throw new Error("camera offset puts the plane behind the target camera");
  }
  return {
    bx: -k.fx * ds * offset.tx - k.cx * ds * offset.tz,
    by: -k.fy * ds * offset.ty - k.cy * ds * offset.tz,
    w,
  };
}

export function isIdentity(a: PlaneAffine): boolean {
  return a.bx === 0 && a.by === 0 && a.w === 1;
}

/** Forward source->target map for Canvas2D setTransform(sc, 0, 0, sc, ex, ey):
 * target = source * sc + e. Inverse of the target->source affine above. */
export function toCanvasTransform(a: PlaneAffine): { sc: number; ex: number; ey: number } {
  return { sc: a.w, ex: -a.bx, ey: -a.by };
}
