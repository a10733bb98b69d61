import { execFileSync } from 'child_process';
import * as fs from 'fs';
import * as path from 'path';

export const FIXTURE_ROOT = path.join(__dirname, '..', '.fixtures');

/**
 * Exported mel-spectrogram images for a synthetic corpus, generated through
 * the feature pipeline's CLI and cached between runs. Returns the index path.
 */
export function ensureImages(name: string, nPerClass: number, seed: number): string {
  const imageDir = path.join(FIXTURE_ROOT, name);
  const indexPath = path.join(imageDir, 'index.json');
  if (fs.existsSync(indexPath)) {
    return indexPath;
  }
  const corpusDir = path.join(FIXTURE_ROOT, `${name}_corpus`);
  fs.mkdirSync(FIXTURE_ROOT, { recursive: true });
  execFileSync('python3', [
    '-m', 'speechlab', 'synth-corpus', corpusDir,
    '--n-per-class', String(nPerClass), '--seed', String(seed),
  ], { stdio: 'pipe' });
  execFileSync('python3', [
    '-m', 'speechlab', 'export-melspec', path.join(corpusDir, 'manifest.json'), imageDir,
  ], { stdio: 'pipe' });
  return indexPath;
}
