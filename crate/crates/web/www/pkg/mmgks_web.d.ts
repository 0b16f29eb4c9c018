/* tslint:disable */
/* eslint-disable */

/**
 * A synthetic space-time problem held between calls.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    frames(): number;
    /**
     * `experiment` is `"deblur"` (medium Gaussian blur, moving phantom) or
     * `"radon"` (limited-angle parallel beam, moving disks, 12 angles per frame).
     */
    constructor(experiment: string, side: number, frames: number, noise: number, seed: bigint);
    /**
     * Blurred frames or per-frame sinograms, column-major.
     */
    observed(): Float64Array;
    observed_cols(): number;
    observed_rows(): number;
    /**
     * Runs MM-GKS. A `fixed_lambda` that is not positive selects `λ` by GCV.
     */
    reconstruct(method: string, nonneg: boolean, fixed_lambda: number, max_iters: number): Reconstruction;
    side(): number;
    /**
     * Column-major frames, one after another.
     */
    truth(): Float64Array;
}

export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * First iteration meeting the discrepancy principle, or −1.
     */
    dp_iteration(): number;
    exit(): string;
    frames(): Float64Array;
    gcv_lambdas(): Float64Array;
    gcv_values(): Float64Array;
    lambda_history(): Float64Array;
    rre(): number;
    rre_history(): Float64Array;
}

/**
 * Names accepted by [`Demo::reconstruct`], comma separated.
 */
export function methods(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly demo_frames: (a: number) => number;
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly demo_observed: (a: number) => [number, number];
    readonly demo_observed_cols: (a: number) => number;
    readonly demo_observed_rows: (a: number) => number;
    readonly demo_reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_side: (a: number) => number;
    readonly demo_truth: (a: number) => [number, number];
    readonly methods: () => [number, number];
    readonly reconstruction_dp_iteration: (a: number) => number;
    readonly reconstruction_exit: (a: number) => [number, number];
    readonly reconstruction_frames: (a: number) => [number, number];
    readonly reconstruction_gcv_lambdas: (a: number) => [number, number];
    readonly reconstruction_gcv_values: (a: number) => [number, number];
    readonly reconstruction_lambda_history: (a: number) => [number, number];
    readonly reconstruction_rre: (a: number) => number;
    readonly reconstruction_rre_history: (a: number) => [number, number];
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
