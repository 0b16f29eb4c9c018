/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const demo_frames: (a: number) => number;
export const demo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const demo_observed: (a: number) => [number, number];
export const demo_observed_cols: (a: number) => number;
export const demo_observed_rows: (a: number) => number;
export const demo_reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_side: (a: number) => number;
export const demo_truth: (a: number) => [number, number];
export const methods: () => [number, number];
export const reconstruction_dp_iteration: (a: number) => number;
export const reconstruction_exit: (a: number) => [number, number];
export const reconstruction_frames: (a: number) => [number, number];
export const reconstruction_gcv_lambdas: (a: number) => [number, number];
export const reconstruction_gcv_values: (a: number) => [number, number];
export const reconstruction_lambda_history: (a: number) => [number, number];
export const reconstruction_rre: (a: number) => number;
export const reconstruction_rre_history: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
