export interface Aggregate {
  n: number;
  mean: number;
  se: number; // sample std / sqrt(n); 0 for a single value
}

export function aggregate(values: number[]): Aggregate {
  const n = values.length;
  if (n === 0) throw new Error("cannot aggregate zero values");
  const mean = values.reduce((a, b) => a + b, 0) / n;
  if (n === 1) return { n, mean, se: 0 };
  const ss = values.reduce((a, b) => a + (b - mean) ** 2, 0);
  return { n, mean, se: Math.sqrt(ss / (n - 1)) / Math.sqrt(n) };
}

/** Group rows by key, preserving first-seen key order. */
export function groupBy<T>(items: T[], key: (item: T) => string): Map<string, T[]> {
  const groups = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = groups.get(k);
    if (bucket) bucket.push(item);
    else groups.set(k, [item]);
  }
  return groups;
}
