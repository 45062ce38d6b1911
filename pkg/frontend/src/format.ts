// Presentation-only helpers. Whole-percent rounding is the single piece of
// arithmetic the UI performs on probabilities; tooltips keep full precision.

import type { StateProbability } from './api.js'

export function wholePercent(probability: number): number {
    return Math.round(probability * 100)
}

export type Bar = {
    state: string
    percent: number
    probability: number
}

export function barsFrom(entries: StateProbability[]): Bar[] {
    return entries.map((e) => ({
        state: e.state,
        percent: wholePercent(e.probability),
        probability: e.probability,
    }))
}

export function formatNumber(x: number, digits = 2): string {
    return x.toFixed(digits)
}

export function formatCI(ci: [number, number], digits = 2): string {
    return `(${ci[0].toFixed(digits)}, ${ci[1].toFixed(digits)})`
}

export function formatSigned(x: number, digits = 2): string {
    const body = Math.abs(x).toFixed(digits)
    if (x > 0) return `+${body}`
    if (x < 0) return `−${body}`
    return body
}
