#!/usr/bin/env node
/** camoval-export: neural-feature export into CEMB files. */
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { generateWeights } from './encoder.js';
import { writeWeights, ModelLoadError } from './weights.js';
import { runExport, EncoderChoice, OutputKind } from './export.js';

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .command(
      'init-weights',
      'generate a seeded encoder weights file',
      (y) => y
        .option('out', { type: 'string', demandOption: true })
        .option('seed', { type: 'number', default: 0 }),
    )
    .command(
      'export',
      'export features for a manifest into a CEMB file',
      (y) => y
        .option('manifest', { type: 'string' })
        .option('encoder', {
          choices: ['image_text_encoder', 'inception_style'] as const,
          demandOption: true,
        })
        .option('kind', {
          choices: ['global', 'grid', 'class_token', 'text_tokens', 'fid_features'] as const,
          demandOption: true,
        })
        .option('weights', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true }),
    )
    .demandCommand(1)
    .strict()
    .parse();

  const command = argv._[0];
  if (command === 'init-weights') {
    writeWeights(argv.out as string, generateWeights((argv.seed as number) ?? 0));
    console.log(`wrote ${argv.out}`);
    return 0;
  }
  if (command === 'export') {
    const result = runExport({
      manifestPath: argv.manifest as string | undefined,
      encoder: argv.encoder as EncoderChoice,
      kind: argv.kind as OutputKind,
      weightsPath: argv.weights as string,
      outPath: argv.out as string,
    });
    console.log(`wrote ${argv.out} (${result.count} records, ` +
      `${result.skipped.length} skipped)`);
    return result.skipped.length === 0 ? 0 : 1;
  }
  console.error(`unknown command ${command}`);
  return 2;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    if (err instanceof ModelLoadError) {
      console.error(`model load error: ${err.message}`);
      process.exit(2);
    }
    console.error(err instanceof Error ? err.message : err);
    process.exit(2);
  },
);
