/**
 * CLI: train the mel-spectrogram CNN from an exported image index.
 *
 *   node dist/cli.js train --index images/index.json --out run/ \
 *        [--lr 1e-3] [--decay 0.9] [--epochs 32] [--batch 32] \
 *        [--patience 5] [--seed 0]
 *
 * Writes <out>/report.json and <out>/model/{model.json,weights.bin}.
 */

import * as fs from 'fs';
import * as path from 'path';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { initBackend } from './backend';
import { DEFAULT_CONFIG, saveModel, trainFromIndex } from './train';

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command('train', 'train the CNN on an exported image index', (cmd) =>
      cmd
        .option('index', { type: 'string', demandOption: true, describe: 'path to index.json' })
        .option('out', { type: 'string', demandOption: true, describe: 'output directory' })
        .option('lr', { type: 'number', default: DEFAULT_CONFIG.learningRate })
        .option('decay', { type: 'number', default: DEFAULT_CONFIG.lrDecay })
        .option('epochs', { type: 'number', default: DEFAULT_CONFIG.maxEpochs })
        .option('batch', { type: 'number', default: DEFAULT_CONFIG.batchSize })
        .option('patience', { type: 'number', default: DEFAULT_CONFIG.patience })
        .option('seed', { type: 'number', default: DEFAULT_CONFIG.seed }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .parse();

  if (!(args._[0] === 'train')) {
    console.error(`unknown command ${args._[0]}`);
    return 2;
  }

  try {
    const backend = await initBackend();
    console.log(`backend: ${backend}`);
    const result = await trainFromIndex(
      args.index as string,
      {
        learningRate: args.lr as number,
        lrDecay: args.decay as number,
        maxEpochs: args.epochs as number,
        batchSize: args.batch as number,
        patience: args.patience as number,
        seed: args.seed as number,
      },
      [0.7, 0.15, 0.15],
      10,
      (line) => console.log(line),
    );

    const outDir = args.out as string;
    fs.mkdirSync(outDir, { recursive: true });
    fs.writeFileSync(
      path.join(outDir, 'report.json'),
      JSON.stringify(result.report, null, 2) + '\n',
    );
    await saveModel(result.model, path.join(outDir, 'model'));

    console.log(`test accuracy: ${result.report.accuracy.toFixed(4)}`);
    console.log(`macro F1:      ${result.report.macro_f1.toFixed(4)}`);
    console.log(`ROC-AUC:       ${result.report.roc_auc.toFixed(4)}`);
    console.log(`epochs run:    ${result.report.epochs_run}`);
    console.log(`report: ${path.join(outDir, 'report.json')}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
