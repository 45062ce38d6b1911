// Evidence controls: pick a discrete state or enter an observed value,
// plus chips mirroring the server's current evidence.

import type { EvidenceView, NodeInfo } from '../api.js'

export type EvidenceHandler = (
    body: { node: string; state: string } | { node: string; value: number },
) => void

export class EvidencePanel {
    readonly root = document.createElement('div')
    private chips = document.createElement('div')
    private controls = document.createElement('div')

    constructor(
        private onApply: EvidenceHandler,
        private onClear: () => void,
    ) {
        this.chips.className = 'chips'
        this.controls.className = 'evidence-controls'
        this.root.append(this.controls, this.chips)
    }

    renderControls(nodes: NodeInfo[]): void {
        this.controls.replaceChildren()
        for (const node of nodes) {
            if (node.kind === 'equation') {
                const row = document.createElement('form')
                row.className = 'evidence-row'
                const label = document.createElement('label')
                label.textContent = `${node.name} =`
                const input = document.createElement('input')
                input.type = 'number'
                input.step = 'any'
                input.placeholder = 'observed value'
                const button = document.createElement('button')
                button.type = 'submit'
                button.textContent = 'observe'
                row.append(label, input, button)
                row.addEventListener('submit', (e) => {
                    e.preventDefault()
                    const value = Number(input.value)
                    if (Number.isFinite(value)) this.onApply({ node: node.name, value })
                })
                this.controls.appendChild(row)
            } else {
                const row = document.createElement('div')
                row.className = 'evidence-row'
                const label = document.createElement('label')
                label.textContent = `${node.name} =`
                const select = document.createElement('select')
                const blank = document.createElement('option')
                blank.value = ''
                blank.textContent = '(set state)'
                select.appendChild(blank)
                for (const state of node.states) {
                    const option = document.createElement('option')
                    option.value = state
                    option.textContent = state
                    select.appendChild(option)
                }
                select.addEventListener('change', () => {
                    if (select.value) this.onApply({ node: node.name, state: select.value })
                    select.value = ''
                })
                row.append(label, select)
                this.controls.appendChild(row)
            }
        }
    }

    renderChips(evidence: EvidenceView): void {
        this.chips.replaceChildren()
        const entries: string[] = Object.entries(evidence.discrete).map(
            ([node, state]) => `${node} = ${state}`,
        )
        if (evidence.continuous) {
            entries.push(`${evidence.continuous.node} = ${evidence.continuous.value}`)
        }
        for (const text of entries) {
            const chip = document.createElement('span')
            chip.className = 'chip'
            chip.textContent = text
            this.chips.appendChild(chip)
        }
        if (entries.length) {
            const clear = document.createElement('button')
            clear.textContent = 'clear all'
            clear.addEventListener('click', () => this.onClear())
            this.chips.appendChild(clear)
        } else {
            const none = document.createElement('span')
            none.className = 'chip muted'
            none.textContent = 'no evidence'
            this.chips.appendChild(none)
        }
    }
}
