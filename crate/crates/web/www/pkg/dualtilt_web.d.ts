/* tslint:disable */
/* eslint-disable */

/**
 * A finished circle run held on the wasm side.
 */
export class Run {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * One actuator component over time: block 0 = alpha, 1 = beta, 2 = omega.
     */
    actuator(block: number, propeller: number): Float64Array;
    objective(): Float64Array;
    position_x(): Float64Array;
    position_y(): Float64Array;
    summary(): string;
    /**
     * Amplitude/offset table over `t >= window`.
     */
    table(window: number): string;
    times(): Float64Array;
}

/**
 * Wrench `[fx, fy, fz, tx, ty, tz, sigma_min]` for a uniform actuator setting,
 * with every propeller at the same tilts and spin magnitude.
 */
export function explore_wrench(alpha_deg: number, beta_deg: number, spin: number): Float64Array;

/**
 * Simulates the reference circle. `objective` is "symmetric", "alpha" or "beta".
 */
export function simulate_circle(gamma_j: number, objective: string, duration: number, every: number): Run;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_run_free: (a: number, b: number) => void;
    readonly explore_wrench: (a: number, b: number, c: number) => [number, number];
    readonly run_actuator: (a: number, b: number, c: number) => [number, number];
    readonly run_objective: (a: number) => [number, number];
    readonly run_position_x: (a: number) => [number, number];
    readonly run_position_y: (a: number) => [number, number];
    readonly run_summary: (a: number) => [number, number];
    readonly run_table: (a: number, b: number) => [number, number, number, number];
    readonly run_times: (a: number) => [number, number];
    readonly simulate_circle: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
