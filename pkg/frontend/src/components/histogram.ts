// Canvas histogram of the forecast distribution, drawn from the service's
// fixed 50-bin layout so the CLI and UI agree on shape.

import type { ForecastResponse } from '../api.js'
import { formatCI, formatNumber } from '../format.js'

export class ForecastHistogram {
    readonly root = document.createElement('div')
    private canvas = document.createElement('canvas')
    private summary = document.createElement('p')
    private ctx: CanvasRenderingContext2D

    constructor(width = 640, height = 220) {
        this.canvas.width = width
        this.canvas.height = height
        this.summary.className = 'forecast-summary'
        this.root.append(this.summary, this.canvas)
        const ctx = this.canvas.getContext('2d')
        if (!ctx) throw new Error('canvas 2d context not available')
        this.ctx = ctx
    }

    render(forecast: ForecastResponse, pinnedMean?: number): void {
        const { counts, edges } = forecast.histogram
        this.summary.textContent =
            `mean ${formatNumber(forecast.mean)}  ` +
            `95% CI ${formatCI(forecast.ci)}  ` +
            `n=${forecast.n} seed=${forecast.seed}`

        const ctx = this.ctx
        const { width, height } = this.canvas
        ctx.clearRect(0, 0, width, height)
        if (!counts.length) return
        const max = Math.max(...counts)
        const barWidth = width / counts.length
        ctx.fillStyle = '#3b82f6'
        counts.forEach((count, i) => {
            const h = max > 0 ? (count / max) * (height - 14) : 0
            ctx.fillRect(i * barWidth, height - h, Math.max(1, barWidth - 1), h)
        })

        const lo = edges[0]
        const hi = edges[edges.length - 1]
        const toX = (v: number) => ((v - lo) / (hi - lo)) * width
        this.markLine(toX(forecast.mean), '#111827')
        if (pinnedMean !== undefined && pinnedMean >= lo && pinnedMean <= hi) {
            this.markLine(toX(pinnedMean), '#9ca3af')
        }
    }

    private markLine(x: number, color: string): void {
        const ctx = this.ctx
        ctx.strokeStyle = color
        ctx.lineWidth = 1.5
        ctx.beginPath()
        ctx.moveTo(x, 0)
        ctx.lineTo(x, this.canvas.height)
        ctx.stroke()
    }
}
