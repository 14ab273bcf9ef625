/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_run_free: (a: number, b: number) => void;
export const explore_wrench: (a: number, b: number, c: number) => [number, number];
export const run_actuator: (a: number, b: number, c: number) => [number, number];
export const run_objective: (a: number) => [number, number];
export const run_position_x: (a: number) => [number, number];
export const run_position_y: (a: number) => [number, number];
export const run_summary: (a: number) => [number, number];
export const run_table: (a: number, b: number) => [number, number, number, number];
export const run_times: (a: number) => [number, number];
export const simulate_circle: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
