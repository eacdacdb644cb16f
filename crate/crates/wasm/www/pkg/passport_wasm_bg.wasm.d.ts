/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_crosscheck_free: (a: number, b: number) => void;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_get_crosscheck_ci95: (a: number) => number;
export const __wbg_get_crosscheck_mc_mean: (a: number) => number;
export const __wbg_get_crosscheck_u_pde: (a: number) => number;
export const __wbg_set_crosscheck_ci95: (a: number, b: number) => void;
export const __wbg_set_crosscheck_mc_mean: (a: number, b: number) => void;
export const __wbg_set_crosscheck_u_pde: (a: number, b: number) => void;
export const demo_controls: (a: number, b: number) => [number, number, number, number];
export const demo_cross_check: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const demo_jump_densities: (a: number, b: number, c: number, d: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const demo_nodes: (a: number) => [number, number, number, number];
export const demo_price: (a: number, b: number, c: number) => [number, number, number];
export const demo_set_kou: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const demo_set_merton: (a: number, b: number, c: number, d: number) => [number, number];
export const demo_set_no_jumps: (a: number) => void;
export const demo_slice: (a: number, b: number) => [number, number, number, number];
export const demo_solve: (a: number, b: number, c: number) => [number, number];
export const demo_tilt_gap: (a: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
