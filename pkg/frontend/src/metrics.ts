/** Mean squared error between two equally-shaped [0, 1] pixel buffers. */
export function mse(a: ArrayLike<number>, b: ArrayLike<number>): number {
  if (a.length !== b.length) {
    throw new Error(`length mismatch: ${a.length} vs ${b.length}`);
  }
  if (a.length === 0) {
    throw new Error("empty buffers");
  }
  let total = 0;
  for (let i = 0; i < a.length; i++) {
    const d = a[i] - b[i];
    total += d * d;
  }
  return total / a.length;
}
