// Posterior bar lists, one block per discrete node. Percent labels are the
// rounded server probabilities; tooltips carry full precision.

import type { PosteriorsResponse } from '../api.js'
import { barsFrom } from '../format.js'
import type { StateDelta } from '../scenario.js'
import { formatSigned } from '../format.js'

export class PosteriorBars {
    readonly root = document.createElement('div')

    render(posteriors: PosteriorsResponse, deltas?: Record<string, StateDelta[]>): void {
        this.root.replaceChildren()
        for (const [node, entries] of Object.entries(posteriors.posteriors)) {
            const block = document.createElement('div')
            block.className = 'node-block'
            const title = document.createElement('h3')
            title.textContent = node
            block.appendChild(title)
            const nodeDeltas = deltas?.[node]
            for (const bar of barsFrom(entries)) {
                const row = document.createElement('div')
                row.className = 'bar-row'
                row.title = `${bar.state}: ${bar.probability}`

                const label = document.createElement('span')
                label.className = 'bar-label'
                label.textContent = bar.state

                const track = document.createElement('div')
                track.className = 'bar-track'
                const fill = document.createElement('div')
                fill.className = 'bar-fill'
                fill.style.width = `${Math.min(100, bar.percent)}%`
                track.appendChild(fill)

                const value = document.createElement('span')
                value.className = 'bar-value'
                value.textContent = `${bar.percent}%`

                row.append(label, track, value)
                const d = nodeDeltas?.find((x) => x.state === bar.state)
                if (d && Math.abs(d.delta) >= 0.0005) {
                    const deltaSpan = document.createElement('span')
                    deltaSpan.className = d.delta > 0 ? 'delta up' : 'delta down'
                    deltaSpan.textContent = `${formatSigned(d.delta * 100, 1)}pp`
                    row.appendChild(deltaSpan)
                }
                block.appendChild(row)
            }
            this.root.appendChild(block)
        }
    }
}
