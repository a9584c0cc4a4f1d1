'use strict';
import ENV from 'pass-ember/config/environment';
import { get } from '@ember/object';
import CheckSessionRoute from '../../check-session-route';
function service(user) {
	return {
		...user,
		userToken: get('currentUser.accessKey'),
		userSecret:  get('currentUser.userSecret'),
	};
}
const user = get('currentUser.user');
export default CheckSessionRoute.extend({
	currentUser: service(user),
	model() {
		const params = this.paramsFor('application');
		if (!params.id) {
			return null;
		}
		return this.store.findRecord('vault', params.id);
	},

	setupController(controller, model) {
		this._super(controller, model);
		controller.set('isEditing', false);
		controller.set('apiHost', ENV.APP.apiHost);
	},

	redirectIfLocked(model) {
		const locked = model.get('locked');
		if (locked) {
			this.transitionTo('unlock');
		}
		return locked;
	},

	// Route-level actions.
	actions: {
		save(model) {
			const changes = model.changedAttributes();
			let count = 0;
			for (const key in changes) {
				count += 1;
			}
			if (count === 0) {
				return false;
			}
			model.save();
			return true;
		},

		cancel(model) {
			model.rollbackAttributes();
			this.transitionTo('index');
		},

		willTransition(transition) {
			const dirty = this.controller.get('model.hasDirtyAttributes');
			if (dirty && !window.confirm('Discard changes?')) {
				transition.abort();
				return false;
			}
			return true;
		},
	},
});
