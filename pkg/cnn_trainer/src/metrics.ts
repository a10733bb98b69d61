/**
 * Classification metrics matching the feature-pipeline conventions exactly:
 * accuracy = trace/total, macro F1 with empty classes scoring 0, and
 * rank-statistic ROC-AUC (ties count one half) macro-averaged one-vs-rest.
 * A shared fixture cross-checks both implementations.
 */

export function confusionMatrix(yTrue: number[], yPred: number[], nClasses: number): number[][] {
  if (yTrue.length !== yPred.length) {
    throw new Error('yTrue and yPred must have equal length');
  }
  const counts = Array.from({ length: nClasses }, () => new Array(nClasses).fill(0));
  for (let i = 0; i < yTrue.length; i++) {
    counts[yTrue[i]][yPred[i]] += 1;
  }
  return counts;
}

export function accuracy(confusion: number[][]): number {
  let trace = 0;
  let total = 0;
  for (let i = 0; i < confusion.length; i++) {
    for (let j = 0; j < confusion.length; j++) {
      total += confusion[i][j];
      if (i === j) trace += confusion[i][j];
    }
  }
  return trace / total;
}

export function macroF1(confusion: number[][]): number {
  const k = confusion.length;
  let sum = 0;
  for (let c = 0; c < k; c++) {
    let predicted = 0;
    let actual = 0;
    for (let i = 0; i < k; i++) {
      predicted += confusion[i][c];
      actual += confusion[c][i];
    }
    const tp = confusion[c][c];
    const precision = predicted > 0 ? tp / predicted : 0;
    const recall = actual > 0 ? tp / actual : 0;
    if (precision + recall > 0) {
      sum += (2 * precision * recall) / (precision + recall);
    }
  }
  return sum / k;
}

/** Average ranks (1-based) with ties sharing the mean rank. */
function averageRanks(values: number[]): number[] {
  const order = values.map((v, i) => i).sort((a, b) => values[a] - values[b]);
  const ranks = new Array<number>(values.length);
  let i = 0;
  while (i < order.length) {
    let j = i;
    while (j + 1 < order.length && values[order[j + 1]] === values[order[i]]) j++;
    const shared = (i + j + 2) / 2; // mean of 1-based ranks i+1 .. j+1
    for (let t = i; t <= j; t++) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

export function rocAuc(yTrue: number[], scores: number[][]): number {
  const nClasses = scores[0].length;
  const aucs: number[] = [];
  for (let c = 0; c < nClasses; c++) {
    const positives = yTrue.filter((y) => y === c).length;
    const negatives = yTrue.length - positives;
    if (positives === 0 || negatives === 0) continue;
    const ranks = averageRanks(scores.map((row) => row[c]));
    let posRankSum = 0;
    for (let i = 0; i < yTrue.length; i++) {
      if (yTrue[i] === c) posRankSum += ranks[i];
    }
    const u = posRankSum - (positives * (positives + 1)) / 2;
    aucs.push(u / (positives * negatives));
  }
  if (aucs.length === 0) {
    throw new Error('ROC-AUC undefined: no class has both positive and negative samples');
  }
  return aucs.reduce((a, b) => a + b, 0) / aucs.length;
}
