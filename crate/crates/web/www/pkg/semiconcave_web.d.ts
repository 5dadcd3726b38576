/* tslint:disable */
/* eslint-disable */

/**
 * Envelope values at the centers of a `cells` x `cells` grid over
 * `[-1, 1]^2`, row by row from the top; cells outside the ball are null.
 */
export function envelope_heatmap(example: string, spacing: number, cells: number): string;

/**
 * Reachable gradients at the origin of `u` and of its envelope, with the
 * hull-gap verdict and the propagation directions it yields.
 */
export function gradient_sets(example: string, spacing: number): string;

/**
 * Traces the singular arc from the origin along the unit vector at
 * `theta_deg`. A lost singularity still returns the part traced so far.
 */
export function trace_arc(example: string, spacing: number, theta_deg: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly envelope_heatmap: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly gradient_sets: (a: number, b: number, c: number) => [number, number, number, number];
    readonly trace_arc: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
