/* tslint:disable */
/* eslint-disable */

/**
 * Monte Carlo estimate next to the solver value at the same start.
 */
export class CrossCheck {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    ci95: number;
    mc_mean: number;
    u_pde: number;
}

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Optimal control on the nearest time slice.
     */
    controls(t: number): Float64Array;
    cross_check(l0: number, n_paths: number, n_steps: number, seed: bigint): CrossCheck;
    jump_densities(z_min: number, z_max: number, n: number): Float64Array;
    constructor(r: number, a: number, sigma: number, maturity: number);
    nodes(): Float64Array;
    /**
     * `V(0, S, X)` with unit control bound.
     */
    price(spot: number, account: number): number;
    set_kou(lambda: number, p: number, eta1: number, eta2: number): void;
    set_merton(lambda: number, mu_j: number, delta: number): void;
    set_no_jumps(): void;
    /**
     * `u(t, ·)` on the nearest time slice.
     */
    slice(t: number): Float64Array;
    solve(nx: number, nt: number): void;
    /**
     * `λ̃ - λ`, which must equal the compensator `∫(e^z - 1) ν(dz)`.
     */
    tilt_gap(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_crosscheck_free: (a: number, b: number) => void;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_get_crosscheck_ci95: (a: number) => number;
    readonly __wbg_get_crosscheck_mc_mean: (a: number) => number;
    readonly __wbg_get_crosscheck_u_pde: (a: number) => number;
    readonly __wbg_set_crosscheck_ci95: (a: number, b: number) => void;
    readonly __wbg_set_crosscheck_mc_mean: (a: number, b: number) => void;
    readonly __wbg_set_crosscheck_u_pde: (a: number, b: number) => void;
    readonly demo_controls: (a: number, b: number) => [number, number, number, number];
    readonly demo_cross_check: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly demo_jump_densities: (a: number, b: number, c: number, d: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly demo_nodes: (a: number) => [number, number, number, number];
    readonly demo_price: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_set_kou: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly demo_set_merton: (a: number, b: number, c: number, d: number) => [number, number];
    readonly demo_set_no_jumps: (a: number) => void;
    readonly demo_slice: (a: number, b: number) => [number, number, number, number];
    readonly demo_solve: (a: number, b: number, c: number) => [number, number];
    readonly demo_tilt_gap: (a: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
