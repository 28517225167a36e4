/** Viewer interaction state: camera offset in parallax units, clamped so
 * layers never invert order on screen, plus layer toggles and autoplay. */

import { Offset } from "./homography.js";

export const DEFAULT_MAX_OFFSET = 0.05;

export interface ViewerState {
  offset: Offset;
  parallaxScale: number | null; // null = use the container's stored scale
  visible: boolean[];
  autoplay: boolean;
  maxOffset: number;
}

export function initialState(layerCount: number, maxOffset = DEFAULT_MAX_OFFSET): ViewerState {
  return {
    offset: { tx: 0, ty: 0, tz: 0 },
    parallaxScale: null,
    visible: new Array(layerCount).fill(true),
    autoplay: false,
    maxOffset,
  };
}

export function clampOffset(offset: Offset, maxOffset: number): Offset {
  const c = (v: number) => Math.min(maxOffset, Math.max(-maxOffset, v));
  return { tx: c(offset.tx), ty: c(offset.ty), tz: c(offset.tz) };
}

/** Pointer pixels -> (tx, ty): linear map, clamped. pixelsPerUnit sets how far
 * a drag travels; dragging right moves the camera left so content follows the
 * pointer. */
export function dragToPose(
  state: ViewerState,
  dxPx: number,
  dyPx: number,
  pixelsPerUnit = 2000,
): ViewerState {
  const offset = clampOffset(
    {
      tx: state.offset.tx - dxPx / pixelsPerUnit,
      ty: state.offset.ty - dyPx / pixelsPerUnit,
      tz: state.offset.tz,
    },
    state.maxOffset,
  );
  return { ...state, offset };
}

/** Wheel delta -> tz: scroll forward dollies in, clamped. */
export function wheelToPose(state: ViewerState, deltaY: number, unitsPerNotch = 0.002): ViewerState {
  const offset = clampOffset(
    { ...state.offset, tz: state.offset.tz - Math.sign(deltaY) * unitsPerNotch },
    state.maxOffset,
  );
  return { ...state, offset };
}

export function toggleLayer(state: ViewerState, index: number): ViewerState {
  if (index < 0 || index >= state.visible.length) return state;
  const visible = state.visible.slice();
  visible[index] = !visible[index];
  return { ...state, visible };
}

export function resetPose(state: ViewerState): ViewerState {
  return { ...state, offset: { tx: 0, ty: 0, tz: 0 } };
}
