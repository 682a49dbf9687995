// Line diff used to highlight template/reference differences side by side.

export type LineKind = "same" | "changed";

export interface MarkedLine {
  text: string;
  kind: LineKind;
}

function lcsTable(a: string[], b: string[]): number[][] {
  const table: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      table[i][j] =
        a[i] === b[j] ? table[i + 1][j + 1] + 1 : Math.max(table[i + 1][j], table[i][j + 1]);
    }
  }
  return table;
}

/**
 * Mark each line of both texts: "same" when it belongs to the longest
 * common subsequence of lines, "changed" otherwise. Returns the marked
 * lines for the left and right texts without reordering anything.
 */
export function diffLines(left: string, right: string): { left: MarkedLine[]; right: MarkedLine[] } {
  const a = left.split("\n");
  const b = right.split("\n");
  const table = lcsTable(a, b);

  const leftMarks: MarkedLine[] = [];
  const rightMarks: MarkedLine[] = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      leftMarks.push({ text: a[i], kind: "same" });
      rightMarks.push({ text: b[j], kind: "same" });
      i++;
      j++;
    } else if (table[i + 1][j] >= table[i][j + 1]) {
      leftMarks.push({ text: a[i], kind: "changed" });
      i++;
    } else {
      rightMarks.push({ text: b[j], kind: "changed" });
      j++;
    }
  }
  while (i < a.length) leftMarks.push({ text: a[i++], kind: "changed" });
  while (j < b.length) rightMarks.push({ text: b[j++], kind: "changed" });
  return { left: leftMarks, right: rightMarks };
}
