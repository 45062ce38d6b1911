// Slider constraint logic: the three equation weights always sum to 1.

import type { Weights } from './api.js'

export const WEIGHT_KEYS = ['price', 'promotions', 'location'] as const
export type WeightKey = (typeof WEIGHT_KEYS)[number]

export const DEFAULT_WEIGHTS: Weights = { price: 0.25, promotions: 0.375, location: 0.375 }

function clamp01(x: number): number {
    return Math.min(1, Math.max(0, x))
}

// Moving one slider rescales the other two proportionally so the total
// stays exactly 1; if the others are both zero the remainder splits evenly.
export function rebalance(weights: Weights, changed: WeightKey, value: number): Weights {
    const next: Weights = { ...weights, [changed]: clamp01(value) }
    const others = WEIGHT_KEYS.filter((k) => k !== changed)
    const remainder = 1 - next[changed]
    const currentOther = others.reduce((sum, k) => sum + weights[k], 0)
    if (currentOther <= 0) {
        for (const k of others) next[k] = remainder / others.length
    } else {
        for (const k of others) next[k] = (weights[k] / currentOther) * remainder
    }
    // absorb float dust into the last free slider so the sum is exactly 1
    const drift = 1 - WEIGHT_KEYS.reduce((sum, k) => sum + next[k], 0)
    next[others[others.length - 1]] += drift
    return next
}

export function weightsSum(weights: Weights): number {
    return WEIGHT_KEYS.reduce((sum, k) => sum + weights[k], 0)
}
