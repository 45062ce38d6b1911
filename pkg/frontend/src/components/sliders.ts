// Weight sliders constrained to sum to 1. Values display at the slider,
// and the forecast panel shows the server's numbers after each change.

import type { Weights } from '../api.js'
import { rebalance, WEIGHT_KEYS } from '../weights.js'
import type { WeightKey } from '../weights.js'

export class WeightSliders {
    readonly root = document.createElement('div')
    private inputs = new Map<WeightKey, HTMLInputElement>()
    private readouts = new Map<WeightKey, HTMLSpanElement>()
    private current: Weights

    constructor(
        initial: Weights,
        private onCommit: (weights: Weights) => void,
    ) {
        this.current = { ...initial }
        this.root.className = 'sliders'
        for (const key of WEIGHT_KEYS) {
            const row = document.createElement('div')
            row.className = 'slider-row'
            const label = document.createElement('label')
            label.textContent = key
            const input = document.createElement('input')
            input.type = 'range'
            input.min = '0'
            input.max = '1'
            input.step = '0.005'
            const readout = document.createElement('span')
            row.append(label, input, readout)
            this.root.appendChild(row)
            this.inputs.set(key, input)
            this.readouts.set(key, readout)
            input.addEventListener('input', () => {
                this.current = rebalance(this.current, key, Number(input.value))
                this.show()
            })
            input.addEventListener('change', () => this.onCommit({ ...this.current }))
        }
        this.show()
    }

    setWeights(weights: Weights): void {
        this.current = { ...weights }
        this.show()
    }

    private show(): void {
        for (const key of WEIGHT_KEYS) {
            const input = this.inputs.get(key)!
            input.value = String(this.current[key])
            this.readouts.get(key)!.textContent = this.current[key].toFixed(3)
        }
    }
}
