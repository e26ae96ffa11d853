import { describe, expect, it } from "vitest";
import { clampSlider, CoalescingRunner, initialState, sliderBounds } from "../src/state";

function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => (resolve = r));
  return { promise, resolve };
}

describe("CoalescingRunner", () => {
  it("keeps at most one request in flight under rapid input", async () => {
    const gates: Array<ReturnType<typeof deferred<string>>> = [];
    const started: number[] = [];
    const finished: Array<[number, string]> = [];
    const runner = new CoalescingRunner<number, string>(
      (value) => {
        started.push(value);
        const gate = deferred<string>();
        gates.push(gate);
        return gate.promise;
      },
      (value, result) => finished.push([value, result]),
    );

    for (let g = 0; g <= 30; g++) runner.submit(g / 10); // slider drag 0.0 -> 3.0
    expect(runner.inFlightCount).toBe(1);
    expect(started).toEqual([0]); // only the first fired so far

    gates[0].resolve("frame-a");
    await new Promise((r) => setTimeout(r, 0));
    // everything between collapsed into the latest value
    expect(started).toEqual([0, 3]);
    expect(runner.inFlightCount).toBe(1);

    gates[1].resolve("frame-b");
    await new Promise((r) => setTimeout(r, 0));
    expect(runner.inFlightCount).toBe(0);
    expect(runner.maxObservedInFlight).toBe(1);
    expect(finished).toEqual([
      [0, "frame-a"],
      [3, "frame-b"],
    ]);
    expect(runner.busy).toBe(false);
  });

  it("reports errors and keeps serving later submissions", async () => {
    const errors: unknown[] = [];
    const results: string[] = [];
    const runner = new CoalescingRunner<number, string>(
      (value) => (value < 0 ? Promise.reject(new Error("bad")) : Promise.resolve(`ok ${value}`)),
      (_v, r) => results.push(r),
      (_v, e) => errors.push(e),
    );
    runner.submit(-1);
    await new Promise((r) => setTimeout(r, 0));
    runner.submit(2);
    await new Promise((r) => setTimeout(r, 0));
    expect(errors).toHaveLength(1);
    expect(results).toEqual(["ok 2"]);
  });
});

describe("slider bounds", () => {
  it("is limited to [0, 3] by default and snaps to 0.1 steps", () => {
    const state = initialState();
    expect(sliderBounds(state)).toEqual({ min: 0, max: 3 });
    expect(clampSlider(state, 1.2345)).toBeCloseTo(1.2, 10);
    expect(clampSlider(state, -5)).toBe(0);
    expect(clampSlider(state, 9)).toBe(3);
  });

  it("extends to [-1, 4] with extrapolation on", () => {
    const state = { ...initialState(), allowExtrapolation: true };
    expect(sliderBounds(state)).toEqual({ min: -1, max: 4 });
    expect(clampSlider(state, -2)).toBe(-1);
    expect(clampSlider(state, 3.96)).toBe(4);
  });
});
