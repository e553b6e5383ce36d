/** Token-level diff for the inline highlight strip. Tokens are words,
 * whitespace runs, or single punctuation marks, so indentation survives
 * and identifiers never split. */

export interface DiffOp {
  kind: "same" | "del" | "add";
  text: string;
}

function tokens(text: string): string[] {
  return text.match(/\w+|\s+|[^\w\s]/g) ?? [];
}

/** Longest-common-subsequence alignment; candidate regions are a few
 * short lines, so the quadratic table is fine. */
export function tokenDiff(before: string, after: string): DiffOp[] {
  const a = tokens(before);
  const b = tokens(after);
  const rows = a.length + 1;
  const cols = b.length + 1;
  const table = Array.from({ length: rows }, () => new Array<number>(cols).fill(0));
  for (let i = a.length - 1; i >= 0; i--) {
    const row = table[i] as number[];
    const next = table[i + 1] as number[];
    for (let j = b.length - 1; j >= 0; j--) {
      row[j] =
        a[i] === b[j]
          ? (next[j + 1] ?? 0) + 1
          : Math.max(next[j] ?? 0, row[j + 1] ?? 0);
    }
  }

  const ops: DiffOp[] = [];
  const push = (kind: DiffOp["kind"], text: string) => {
    const last = ops[ops.length - 1];
    if (last && last.kind === kind) {
      last.text += text;
    } else {
      ops.push({ kind, text });
    }
  };
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      push("same", a[i] as string);
      i += 1;
      j += 1;
    } else if ((table[i + 1]?.[j] ?? 0) >= (table[i]?.[j + 1] ?? 0)) {
      push("del", a[i] as string);
      i += 1;
    } else {
      push("add", b[j] as string);
      j += 1;
    }
  }
  while (i < a.length) {
    push("del", a[i] as string);
    i += 1;
  }
  while (j < b.length) {
    push("add", b[j] as string);
    j += 1;
  }
  return ops;
}
